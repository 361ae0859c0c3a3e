use std::collections::BTreeMap;
use std::net::Ipv4Addr;

use proptest::prelude::*;
use resfi::apps::{channel_selection_step, NeighborInfo};
use resfi::crypto::{decode_ie, encode_ie, generate_identity, open_group, seal_group, KeyMaterial, ResFiIe};
use resfi::{ApId, ChannelId};

fn key() -> impl Strategy<Value = KeyMaterial> {
    any::<[u8; 32]>().prop_map(|b| KeyMaterial::from_bytes(&b))
}

proptest! {
    #[test]
    fn group_seal_roundtrip(plain in proptest::collection::vec(any::<u8>(), 0..2048), k in key(), other in key()) {
        let sealed = seal_group(&plain, &k);
        prop_assert_eq!(open_group(&sealed, &k).unwrap(), plain);
        if other != k {
            prop_assert!(open_group(&sealed, &other).is_err());
        }
    }

    #[test]
    fn sealed_bit_flips_rejected(plain in proptest::collection::vec(any::<u8>(), 0..256), k in key(), pos in any::<prop::sample::Index>(), bit in 0u8..8) {
        let mut sealed = seal_group(&plain, &k);
        let i = pos.index(sealed.len());
        sealed[i] ^= 1 << bit;
        prop_assert!(open_group(&sealed, &k).is_err());
    }

    #[test]
    fn ie_encoding_is_a_bijection(k in key(), ip in any::<u32>(), big in any::<bool>(), which in 0u64..3) {
        let ie = if big {
            ResFiIe::Big { key: k, wired_ip: Ipv4Addr::from(ip), public_key: generate_identity(which).public_key().clone() }
        } else {
            ResFiIe::Small { key: k }
        };
        let bytes = encode_ie(&ie);
        prop_assert_eq!(bytes.len(), ie.encoded_len());
        let back = decode_ie(&bytes).unwrap();
        prop_assert_eq!(encode_ie(&back), bytes);
        prop_assert_eq!(back, ie);
    }

    #[test]
    fn decoded_ies_reencode_identically(bytes in proptest::collection::vec(any::<u8>(), 0..260)) {
        if let Ok(ie) = decode_ie(&bytes) {
            prop_assert_eq!(encode_ie(&ie), bytes);
        }
    }

    #[test]
    fn selection_is_argmin_of_max_rule(
        self_load in 0u64..10,
        nbs in proptest::collection::vec((0u64..10, 0usize..4), 0..8),
        k in 1usize..=4,
    ) {
        let channels: Vec<ChannelId> = (1..=k as u16).map(ChannelId).collect();
        let info: BTreeMap<ApId, NeighborInfo> = nbs
            .iter()
            .enumerate()
            .map(|(i, &(load, c))| (ApId::new(format!("n{i}")), NeighborInfo { load, ch: ChannelId(c as u16 + 1) }))
            .collect();
        let cost = |ch: ChannelId| {
            info.values().filter(|nb| nb.ch == ch).map(|nb| self_load + nb.load).max().unwrap_or(0)
        };
        let best = channels.iter().copied().min_by_key(|&c| (cost(c), c)).unwrap();
        prop_assert_eq!(channel_selection_step(self_load, &info, &channels).unwrap(), best);
    }
}
