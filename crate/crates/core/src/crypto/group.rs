use aes::Aes128;
use cfb_mode::cipher::{AsyncStreamCipher, KeyIvInit};
use hmac::{Hmac, Mac};
use rand::{CryptoRng, RngCore};
use sha2::{Digest, Sha256};

use super::CryptoError;

pub const GROUP_KEY_LEN: usize = 16;
pub const IV_LEN: usize = 16;
/// Serialized key‖iv as carried in both IE variants.
pub const KEY_MATERIAL_LEN: usize = GROUP_KEY_LEN + IV_LEN;
/// Integrity tag appended inside every group-sealed payload.
pub const TAG_LEN: usize = 16;

type Aes128CfbEnc = cfb_mode::Encryptor<Aes128>;
type Aes128CfbDec = cfb_mode::Decryptor<Aes128>;
type HmacSha256 = Hmac<Sha256>;

/// AES-128 key and CFB initialization vector.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct KeyMaterial {
    pub key: [u8; GROUP_KEY_LEN],
    pub iv: [u8; IV_LEN],
}

impl KeyMaterial {
    pub fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        let mut key = [0u8; GROUP_KEY_LEN];
        let mut iv = [0u8; IV_LEN];
        rng.fill_bytes(&mut key);
        rng.fill_bytes(&mut iv);
        KeyMaterial { key, iv }
    }

    pub fn to_bytes(&self) -> [u8; KEY_MATERIAL_LEN] {
        let mut out = [0u8; KEY_MATERIAL_LEN];
        out[..GROUP_KEY_LEN].copy_from_slice(&self.key);
        out[GROUP_KEY_LEN..].copy_from_slice(&self.iv);
        out
    }

    pub fn from_bytes(bytes: &[u8; KEY_MATERIAL_LEN]) -> Self {
        let mut key = [0u8; GROUP_KEY_LEN];
        let mut iv = [0u8; IV_LEN];
        key.copy_from_slice(&bytes[..GROUP_KEY_LEN]);
        iv.copy_from_slice(&bytes[GROUP_KEY_LEN..]);
        KeyMaterial { key, iv }
    }

    fn mac_key(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(b"resfi-group-tag");
        h.update(self.key);
        h.update(self.iv);
        h.finalize().into()
    }

    fn tag(&self, plaintext: &[u8]) -> HmacSha256 {
        let mut mac = HmacSha256::new_from_slice(&self.mac_key()).expect("hmac accepts any key length");
        mac.update(plaintext);
        mac
    }
}

impl std::fmt::Debug for KeyMaterial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "KeyMaterial({:02x}{:02x}{:02x}{:02x}..)", self.key[0], self.key[1], self.key[2], self.key[3])
    }
}

/// Transient group session key of one AP.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroupKey {
    pub material: KeyMaterial,
    /// Strictly increasing per issuing AP; not serialized into IEs.
    pub epoch: u64,
}

impl GroupKey {
    pub fn to_bytes(&self) -> [u8; KEY_MATERIAL_LEN] {
        self.material.to_bytes()
    }
}

/// Draws a fresh key/iv pair with `epoch = prev_epoch + 1`.
pub fn generate_group_key<R: RngCore + CryptoRng>(rng: &mut R, prev_epoch: u64) -> GroupKey {
    GroupKey { material: KeyMaterial::random(rng), epoch: prev_epoch + 1 }
}

/// Encrypts `plaintext‖tag` with AES-128-CFB.
pub fn seal_group(plaintext: &[u8], key: &KeyMaterial) -> Vec<u8> {
    let tag = key.tag(plaintext).finalize().into_bytes();
    let mut buf = Vec::with_capacity(plaintext.len() + TAG_LEN);
    buf.extend_from_slice(plaintext);
    buf.extend_from_slice(&tag[..TAG_LEN]);
    Aes128CfbEnc::new(&key.key.into(), &key.iv.into()).encrypt(&mut buf);
    buf
}

pub fn open_group(ciphertext: &[u8], key: &KeyMaterial) -> Result<Vec<u8>, CryptoError> {
    if ciphertext.len() < TAG_LEN {
        return Err(CryptoError::WrongKey);
    }
    let mut buf = ciphertext.to_vec();
    Aes128CfbDec::new(&key.key.into(), &key.iv.into()).decrypt(&mut buf);
    let split = buf.len() - TAG_LEN;
    key.tag(&buf[..split]).verify_truncated_left(&buf[split..]).map_err(|_| CryptoError::WrongKey)?;
    buf.truncate(split);
    Ok(buf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn epoch_follows_previous() {
        let gk = generate_group_key(&mut rng(), 0);
        assert_eq!(gk.epoch, 1);
        assert_eq!(gk.to_bytes().len(), 32);
        let next = generate_group_key(&mut rng(), gk.epoch);
        assert_eq!(next.epoch, 2);
    }

    #[test]
    fn thousand_keys_are_distinct() {
        let mut r = rng();
        let mut seen = HashSet::new();
        let mut epoch = 0;
        for _ in 0..1000 {
            let gk = generate_group_key(&mut r, epoch);
            epoch = gk.epoch;
            assert!(seen.insert(gk.material.key), "repeated key");
        }
    }

    #[test]
    fn empty_roundtrip_and_wrong_key() {
        let mut r = rng();
        let a = KeyMaterial::random(&mut r);
        let b = KeyMaterial::random(&mut r);
        let sealed = seal_group(b"", &a);
        assert_eq!(sealed.len(), TAG_LEN);
        assert_eq!(open_group(&sealed, &a).unwrap(), b"");
        assert_eq!(open_group(&sealed, &b), Err(CryptoError::WrongKey));
        assert_eq!(open_group(&sealed[..3], &a), Err(CryptoError::WrongKey));
    }

    #[test]
    fn megabyte_roundtrip() {
        let mut r = rng();
        let key = KeyMaterial::random(&mut r);
        let mut payload = vec![0u8; 1 << 20];
        r.fill_bytes(&mut payload);
        let sealed = seal_group(&payload, &key);
        assert_ne!(&sealed[..64], &payload[..64]);
        assert_eq!(open_group(&sealed, &key).unwrap(), payload);
    }

    #[test]
    fn bytes_roundtrip() {
        let key = KeyMaterial::random(&mut rng());
        assert_eq!(KeyMaterial::from_bytes(&key.to_bytes()), key);
    }
}
