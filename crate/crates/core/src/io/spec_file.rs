//! Sweep specs are TOML documents of `key = value` lists:
//!
//! ```toml
//! populations = [8, 16]
//! adversaries = [2, 3]
//! deltas = [16]
//! epsilons = [4]
//! dc_ratios = [[0.5, 0.5], [1.0, 0.5]]   # (d, c)
//! delays = ["none", "stability", "stability+20"]
//! replications = 3
//! base_seed = 7
//! ```
//!
//! Keys left out take the default grid's values.

use crate::error::{Error, FormatError};
use crate::sweep::SweepSpec;

pub fn parse_sweep_spec(text: &str) -> Result<SweepSpec, Error> {
    let spec: SweepSpec = toml::from_str(text).map_err(|e| FormatError::Spec(e.message().to_string()))?;
    spec.validate()?;
    Ok(spec)
}

pub fn render_sweep_spec(spec: &SweepSpec) -> String {
    toml::to_string(spec).expect("sweep spec renders as toml")
}
