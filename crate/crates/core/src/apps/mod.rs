//! Reference applications, written against the northbound API only.
//!
//! - [`ChannelSelectionApp`]: Hminmax channel selection.
//! - [`DcaApp`]: weight-based clustering.
//! - [`E2eKeyApp`]: public key exchange and end-to-end sealed messages within a cluster.

mod channel;
mod dca;
mod e2e;

pub use channel::{
    best_response, channel_selection_step, chromatic_number, conflict_weights, count_conflicts, next_channel,
    optimal_conflicts, reachable_fixpoints, ChannelSelectionApp, ChannelSelectionConfig, NeighborInfo,
    CHANNEL_NAMESPACE,
};
pub use dca::{
    dca_round, is_independent_dominating, simulate_dca, ClusterState, DcaApp, DcaConfig, DcaOutcome, Role, Weight,
    DCA_NAMESPACE,
};
pub use e2e::{ClusterRole, E2eConfig, E2eKeyApp, E2E_NAMESPACE};

use thiserror::Error;

use crate::api::{ApiError, Application};
use crate::types::ApId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AppError {
    #[error("channel list is empty")]
    EmptyChannelList,
    #[error("no public key known for {0}")]
    UnknownPeer(ApId),
    #[error("unknown application {0:?}")]
    UnknownApp(String),
    #[error(transparent)]
    Api(#[from] ApiError),
}

/// Names accepted by [`build_app`].
pub const APP_NAMES: [&str; 2] = ["channel", "dca"];

/// Default-configured app and its namespace, by short name.
pub fn build_app(name: &str) -> Result<(&'static str, Box<dyn Application>), AppError> {
    match name {
        "channel" => Ok((CHANNEL_NAMESPACE, Box::new(ChannelSelectionApp::new(ChannelSelectionConfig::default())))),
        "dca" => Ok((DCA_NAMESPACE, Box::new(DcaApp::new(DcaConfig::default())))),
        other => Err(AppError::UnknownApp(other.to_owned())),
    }
}
