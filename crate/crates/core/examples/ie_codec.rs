//! Encoding the vendor-specific information elements carried in beacons and probes.
use std::net::Ipv4Addr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use resfi::crypto::{decode_ie, encode_ie, generate_identity, KeyMaterial, ResFiIe};

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let key = KeyMaterial::random(&mut rng);
    let identity = generate_identity(5);

    let big = ResFiIe::Big { key, wired_ip: Ipv4Addr::new(10, 0, 0, 7), public_key: identity.public_key().clone() };
    let small = ResFiIe::Small { key };
    for ie in [big, small] {
        let bytes = encode_ie(&ie);
        println!("{} octets: {}...", bytes.len(), hex(&bytes[..24]));
        assert_eq!(decode_ie(&bytes).unwrap(), ie);
    }
    println!("truncated: {:?}", decode_ie(&[0xdd, 0x05, 1, 2, 3]).unwrap_err());
}
