use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::{CryptoRng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rsa::pkcs8::{DecodePublicKey, EncodePublicKey};
use rsa::{Oaep, Pkcs1v15Sign, RsaPrivateKey, RsaPublicKey};
use sha2::{Digest, Sha256};

use super::group::{open_group, seal_group, KeyMaterial, KEY_MATERIAL_LEN};
use super::CryptoError;

pub const RSA_BITS: usize = 1024;
/// SubjectPublicKeyInfo DER length of an RSA-1024 key with e = 65537.
pub const PUBLIC_KEY_DER_LEN: usize = 162;
/// RSA-OAEP output size for a 1024-bit modulus.
pub const WRAPPED_KEY_LEN: usize = RSA_BITS / 8;

/// Public half of an identity key, kept together with its DER form.
#[derive(Clone, PartialEq, Eq)]
pub struct PublicKey {
    key: RsaPublicKey,
    der: Arc<[u8]>,
}

impl PublicKey {
    pub fn from_der(der: &[u8]) -> Result<Self, CryptoError> {
        let key = RsaPublicKey::from_public_key_der(der).map_err(|_| CryptoError::InvalidPublicKey)?;
        Ok(PublicKey { key, der: der.into() })
    }

    pub fn der(&self) -> &[u8] {
        &self.der
    }

    pub fn rsa(&self) -> &RsaPublicKey {
        &self.key
    }
}

impl std::fmt::Debug for PublicKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let fp = Sha256::digest(&self.der);
        write!(f, "PublicKey({:02x}{:02x}{:02x}{:02x})", fp[0], fp[1], fp[2], fp[3])
    }
}

/// RSA identity of one RRM unit. Cheap to clone.
#[derive(Clone)]
pub struct IdentityKeypair {
    private: Arc<RsaPrivateKey>,
    public: PublicKey,
}

impl IdentityKeypair {
    pub fn public_key(&self) -> &PublicKey {
        &self.public
    }

    fn from_private(private: RsaPrivateKey) -> Self {
        let key = RsaPublicKey::from(&private);
        let der: Arc<[u8]> = key.to_public_key_der().expect("RSA public key always encodes").as_bytes().into();
        debug_assert_eq!(der.len(), PUBLIC_KEY_DER_LEN);
        IdentityKeypair { private: Arc::new(private), public: PublicKey { key, der } }
    }
}

impl std::fmt::Debug for IdentityKeypair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("IdentityKeypair").field("public", &self.public).finish_non_exhaustive()
    }
}

type KeyCache = Mutex<HashMap<u64, Arc<OnceLock<IdentityKeypair>>>>;

fn cache() -> &'static KeyCache {
    static CACHE: OnceLock<KeyCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Deterministically derives an RSA-1024 identity from `seed`.
///
/// Prime generation dominates emulation start-up, so results are memoized per
/// seed for the lifetime of the process.
pub fn generate_identity(seed: u64) -> IdentityKeypair {
    let cell = cache().lock().expect("key cache poisoned").entry(seed).or_default().clone();
    cell.get_or_init(|| {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let private = RsaPrivateKey::new(&mut rng, RSA_BITS).expect("RSA key generation");
        IdentityKeypair::from_private(private)
    })
    .clone()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature(pub Vec<u8>);

impl Signature {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

pub fn sign(data: &[u8], keys: &IdentityKeypair) -> Signature {
    let digest = Sha256::digest(data);
    let sig = keys.private.sign(Pkcs1v15Sign::new::<Sha256>(), &digest).expect("PKCS#1 v1.5 signing with a valid key");
    Signature(sig)
}

/// Never errors; malformed signatures simply fail verification.
pub fn verify(data: &[u8], signature: &[u8], public: &PublicKey) -> bool {
    let digest = Sha256::digest(data);
    public.key.verify(Pkcs1v15Sign::new::<Sha256>(), &digest, signature).is_ok()
}

/// Hybrid encryption: a fresh AES key is wrapped with RSA-OAEP, the payload is group-sealed.
pub fn seal_unicast<R: RngCore + CryptoRng>(plaintext: &[u8], receiver: &PublicKey, rng: &mut R) -> Vec<u8> {
    let session = KeyMaterial::random(rng);
    let mut out = receiver
        .key
        .encrypt(rng, Oaep::new::<Sha256>(), &session.to_bytes())
        .expect("32 octets fit into an OAEP block");
    debug_assert_eq!(out.len(), WRAPPED_KEY_LEN);
    out.extend_from_slice(&seal_group(plaintext, &session));
    out
}

pub fn open_unicast(ciphertext: &[u8], keys: &IdentityKeypair) -> Result<Vec<u8>, CryptoError> {
    if ciphertext.len() < WRAPPED_KEY_LEN {
        return Err(CryptoError::WrongKey);
    }
    let (wrapped, body) = ciphertext.split_at(WRAPPED_KEY_LEN);
    let raw = keys.private.decrypt(Oaep::new::<Sha256>(), wrapped).map_err(|_| CryptoError::WrongKey)?;
    let raw: [u8; KEY_MATERIAL_LEN] = raw.try_into().map_err(|_| CryptoError::WrongKey)?;
    open_group(body, &KeyMaterial::from_bytes(&raw))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn der_is_162_octets() {
        let id = generate_identity(1);
        assert_eq!(id.public_key().der().len(), PUBLIC_KEY_DER_LEN);
        let parsed = PublicKey::from_der(id.public_key().der()).unwrap();
        assert_eq!(&parsed, id.public_key());
    }

    #[test]
    fn same_seed_same_key() {
        assert_eq!(generate_identity(2).public_key(), generate_identity(2).public_key());
    }

    #[test]
    fn sign_verify_and_bit_flips() {
        let id = generate_identity(3);
        let data = b"resfi control message".to_vec();
        let sig = sign(&data, &id);
        assert!(verify(&data, sig.as_bytes(), id.public_key()));

        let mut bad = data.clone();
        bad[4] ^= 0x01;
        assert!(!verify(&bad, sig.as_bytes(), id.public_key()));

        let mut bad_sig = sig.0.clone();
        bad_sig[10] ^= 0x80;
        assert!(!verify(&data, &bad_sig, id.public_key()));
        assert!(!verify(&data, &[], id.public_key()));
        assert!(!verify(&data, &[0u8; 400], id.public_key()));
    }

    #[test]
    fn unicast_roundtrip_and_wrong_receiver() {
        let alice = generate_identity(4);
        let bob = generate_identity(5);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut payload = vec![0u8; 10 * 1024];
        rng.fill_bytes(&mut payload);
        let sealed = seal_unicast(&payload, alice.public_key(), &mut rng);
        assert_eq!(open_unicast(&sealed, &alice).unwrap(), payload);
        assert_eq!(open_unicast(&sealed, &bob), Err(CryptoError::WrongKey));
        assert_eq!(open_unicast(&sealed[..20], &alice), Err(CryptoError::WrongKey));
    }

    #[test]
    fn invalid_der_rejected() {
        assert_eq!(PublicKey::from_der(&[0u8; 162]).unwrap_err(), CryptoError::InvalidPublicKey);
    }
}
