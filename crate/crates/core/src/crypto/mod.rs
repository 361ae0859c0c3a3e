//! Cryptographic envelope services and the ResFi information-element codec.
//!
//! Defaults follow the deployed system: RSA-1024 identity keys (PKCS#1 v1.5
//! signatures over SHA-256, OAEP key wrapping) and AES-128 in CFB mode for the
//! transient group keys. Group sealing appends a truncated HMAC-SHA256 tag so a
//! wrong key or a modified ciphertext is always detected.

mod group;
mod identity;
mod ie;

pub use group::{
    generate_group_key, open_group, seal_group, GroupKey, KeyMaterial, GROUP_KEY_LEN, IV_LEN, KEY_MATERIAL_LEN, TAG_LEN,
};
pub use identity::{
    generate_identity, open_unicast, seal_unicast, sign, verify, IdentityKeypair, PublicKey, Signature,
    PUBLIC_KEY_DER_LEN, RSA_BITS, WRAPPED_KEY_LEN,
};
pub use ie::{
    decode_ie, decode_ie_with_oui, encode_ie, encode_ie_with_oui, format_fixed_ip, parse_fixed_ip, ResFiIe, BIG_IE_LEN,
    DEFAULT_OUI, IE_HEADER_LEN, RESFI_VENDOR_TYPE, SMALL_IE_LEN, VENDOR_SPECIFIC_ELEMENT_ID, WIRED_ADDRESS_LEN,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CryptoError {
    /// Integrity check failed: the key does not match or the ciphertext was modified.
    #[error("wrong key or corrupted ciphertext")]
    WrongKey,
    #[error("malformed information element: {0}")]
    MalformedIe(String),
    #[error("invalid public key encoding")]
    InvalidPublicKey,
    #[error("invalid wired address {0:?}")]
    InvalidAddress(String),
}
