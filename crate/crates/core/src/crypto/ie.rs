//! Bit-exact codec for the vendor-specific ResFi information elements.
//!
//! ```text
//! [0]      element id (221, vendor specific)
//! [1]      length of the remaining octets
//! [2..5]   OUI
//! [5]      vendor type
//! [6..22]  group key
//! [22..38] CFB initialization vector
//! -- big variant only --
//! [38..53]  wired address, zero-padded dotted quad ("192.168.001.007")
//! [53..215] RSA public key, SubjectPublicKeyInfo DER
//! ```

use std::net::Ipv4Addr;

use super::group::{KeyMaterial, KEY_MATERIAL_LEN};
use super::identity::{PublicKey, PUBLIC_KEY_DER_LEN};
use super::CryptoError;

pub const VENDOR_SPECIFIC_ELEMENT_ID: u8 = 221;
/// Placeholder OUI; configurable through the `*_with_oui` functions.
pub const DEFAULT_OUI: [u8; 3] = [0x00, 0x00, 0x00];
pub const RESFI_VENDOR_TYPE: u8 = 0x01;
pub const IE_HEADER_LEN: usize = 6;
pub const WIRED_ADDRESS_LEN: usize = 15;
pub const SMALL_IE_LEN: usize = IE_HEADER_LEN + KEY_MATERIAL_LEN;
pub const BIG_IE_LEN: usize = SMALL_IE_LEN + WIRED_ADDRESS_LEN + PUBLIC_KEY_DER_LEN;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ResFiIe {
    /// Full credentials, exchanged while bootstrapping.
    Big { key: KeyMaterial, wired_ip: Ipv4Addr, public_key: PublicKey },
    /// Key refresh only, answered to empty probe requests.
    Small { key: KeyMaterial },
}

impl ResFiIe {
    pub fn key(&self) -> &KeyMaterial {
        match self {
            ResFiIe::Big { key, .. } | ResFiIe::Small { key } => key,
        }
    }

    pub fn is_big(&self) -> bool {
        matches!(self, ResFiIe::Big { .. })
    }

    pub fn encoded_len(&self) -> usize {
        if self.is_big() {
            BIG_IE_LEN
        } else {
            SMALL_IE_LEN
        }
    }
}

pub fn encode_ie(ie: &ResFiIe) -> Vec<u8> {
    encode_ie_with_oui(ie, DEFAULT_OUI)
}

pub fn decode_ie(bytes: &[u8]) -> Result<ResFiIe, CryptoError> {
    decode_ie_with_oui(bytes, DEFAULT_OUI)
}

pub fn encode_ie_with_oui(ie: &ResFiIe, oui: [u8; 3]) -> Vec<u8> {
    let total = ie.encoded_len();
    let mut out = Vec::with_capacity(total);
    out.push(VENDOR_SPECIFIC_ELEMENT_ID);
    out.push((total - 2) as u8);
    out.extend_from_slice(&oui);
    out.push(RESFI_VENDOR_TYPE);
    out.extend_from_slice(&ie.key().to_bytes());
    if let ResFiIe::Big { wired_ip, public_key, .. } = ie {
        out.extend_from_slice(&format_fixed_ip(*wired_ip));
        out.extend_from_slice(public_key.der());
    }
    debug_assert_eq!(out.len(), total);
    out
}

pub fn decode_ie_with_oui(bytes: &[u8], oui: [u8; 3]) -> Result<ResFiIe, CryptoError> {
    let malformed = |why: &str| CryptoError::MalformedIe(why.to_owned());
    if bytes.len() != BIG_IE_LEN && bytes.len() != SMALL_IE_LEN {
        return Err(malformed(&format!("length {} is neither {SMALL_IE_LEN} nor {BIG_IE_LEN}", bytes.len())));
    }
    if bytes[0] != VENDOR_SPECIFIC_ELEMENT_ID {
        return Err(malformed("not a vendor specific element"));
    }
    if bytes[1] as usize != bytes.len() - 2 {
        return Err(malformed("length field mismatch"));
    }
    if bytes[2..5] != oui || bytes[5] != RESFI_VENDOR_TYPE {
        return Err(malformed("foreign vendor"));
    }
    let raw: &[u8; KEY_MATERIAL_LEN] = bytes[IE_HEADER_LEN..SMALL_IE_LEN].try_into().expect("length checked");
    let key = KeyMaterial::from_bytes(raw);
    if bytes.len() == SMALL_IE_LEN {
        return Ok(ResFiIe::Small { key });
    }
    let addr_end = SMALL_IE_LEN + WIRED_ADDRESS_LEN;
    let wired_ip = parse_fixed_ip(&bytes[SMALL_IE_LEN..addr_end])?;
    let public_key = PublicKey::from_der(&bytes[addr_end..]).map_err(|_| malformed("bad public key"))?;
    Ok(ResFiIe::Big { key, wired_ip, public_key })
}

/// "192.168.1.7" -> b"192.168.001.007"
pub fn format_fixed_ip(ip: Ipv4Addr) -> [u8; WIRED_ADDRESS_LEN] {
    let [a, b, c, d] = ip.octets();
    let text = format!("{a:03}.{b:03}.{c:03}.{d:03}");
    text.as_bytes().try_into().expect("always 15 octets")
}

pub fn parse_fixed_ip(field: &[u8]) -> Result<Ipv4Addr, CryptoError> {
    let text = std::str::from_utf8(field).map_err(|_| CryptoError::InvalidAddress(format!("{field:?}")))?;
    let bad = || CryptoError::InvalidAddress(text.to_owned());
    let parts: Vec<&str> = text.split('.').collect();
    if field.len() != WIRED_ADDRESS_LEN || parts.len() != 4 || parts.iter().any(|p| p.len() != 3) {
        return Err(bad());
    }
    let mut octets = [0u8; 4];
    for (o, p) in octets.iter_mut().zip(&parts) {
        *o = p.parse().map_err(|_| bad())?;
    }
    Ok(Ipv4Addr::from(octets))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::generate_identity;

    fn key() -> KeyMaterial {
        KeyMaterial { key: [7; 16], iv: [9; 16] }
    }

    fn big() -> ResFiIe {
        ResFiIe::Big {
            key: key(),
            wired_ip: Ipv4Addr::new(192, 168, 1, 7),
            public_key: generate_identity(11).public_key().clone(),
        }
    }

    #[test]
    fn big_layout() {
        let bytes = encode_ie(&big());
        assert_eq!(bytes.len(), 215);
        assert_eq!(bytes[0], 221);
        assert_eq!(bytes[1], 213);
        assert_eq!(&bytes[38..53], b"192.168.001.007");
        assert_eq!(decode_ie(&bytes).unwrap(), big());
    }

    #[test]
    fn small_layout() {
        let ie = ResFiIe::Small { key: key() };
        let bytes = encode_ie(&ie);
        assert_eq!(bytes.len(), 38);
        assert_eq!(bytes[1], 36);
        assert_eq!(&bytes[6..22], &[7; 16]);
        assert_eq!(&bytes[22..38], &[9; 16]);
        assert_eq!(decode_ie(&bytes).unwrap(), ie);
    }

    #[test]
    fn truncated_big_is_malformed() {
        let bytes = encode_ie(&big());
        assert!(matches!(decode_ie(&bytes[..214]), Err(CryptoError::MalformedIe(_))));
        assert!(matches!(decode_ie(&[]), Err(CryptoError::MalformedIe(_))));
    }

    #[test]
    fn header_checks() {
        let mut bytes = encode_ie(&ResFiIe::Small { key: key() });
        bytes[0] = 220;
        assert!(decode_ie(&bytes).is_err());
        let bytes = encode_ie_with_oui(&ResFiIe::Small { key: key() }, [0x00, 0x1b, 0x2c]);
        assert!(decode_ie(&bytes).is_err());
        assert!(decode_ie_with_oui(&bytes, [0x00, 0x1b, 0x2c]).is_ok());
        let mut bytes = encode_ie(&big());
        bytes[40] = b'x';
        assert!(decode_ie(&bytes).is_err());
    }

    #[test]
    fn fixed_ip_roundtrip() {
        for ip in [Ipv4Addr::new(0, 0, 0, 0), Ipv4Addr::new(255, 255, 255, 255), Ipv4Addr::new(10, 0, 3, 21)] {
            assert_eq!(parse_fixed_ip(&format_fixed_ip(ip)).unwrap(), ip);
        }
        assert!(parse_fixed_ip(b"192.168.1.7\0\0\0\0").is_err());
        assert!(parse_fixed_ip(b"256.000.000.001").is_err());
    }
}
