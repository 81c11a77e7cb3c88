//! Drivers that turn the library into reproducible data: each takes a
//! config, runs a study and returns unit-tagged tables with provenance.

pub mod compiler_study;
pub mod fig2;
pub mod info;
pub mod network_sweep;
pub mod ops;
pub mod overlap;
pub mod squeeze;
pub mod table;

use std::path::Path;

use serde::de::DeserializeOwned;

use crate::error::{Error, Result};

pub use compiler_study::{run_compiler_verification, CompilerStudy, CompilerStudyConfig};
pub use fig2::{four_step_energy, run_fig2, Fig2Config, Fig2Output, InsetLinearity};
pub use info::{run_info_content, InfoInput, InfoReport};
pub use network_sweep::{
    run_network_sweep, run_selectivity, NetworkSweepConfig, SelectivityConfig, SweepFit, SweepParameter,
};
pub use ops::{run_ops_check, OpsReport, OPS_TOLERANCE};
pub use overlap::{run_overlap_study, tact_squeezed_states, OverlapConfig, SqueezedPoint};
pub use squeeze::{run_squeeze_protocols, transverse_variance, SqueezeConfig, SqueezeProtocol};
pub use table::{Column, ResultTable, TableMetadata, DIMENSIONLESS};

/// Parses a JSON config; every failure is a config error.
pub fn parse_config<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

pub fn load_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}
