//! Shipped experiment configurations.

use super::ExperimentConfig;
use crate::error::{Error, Result};

const PRESETS: &[(&str, &str)] = &[
    ("cancer_bounds", include_str!("../../presets/cancer_bounds.cfg")),
    ("gaussian_bounds", include_str!("../../presets/gaussian_bounds.cfg")),
    ("gaussian_corruption", include_str!("../../presets/gaussian_corruption.cfg")),
    ("gaussian_noise", include_str!("../../presets/gaussian_noise.cfg")),
    ("heart_bounds", include_str!("../../presets/heart_bounds.cfg")),
    ("heart_corruption", include_str!("../../presets/heart_corruption.cfg")),
    ("heart_noise", include_str!("../../presets/heart_noise.cfg")),
    ("htru2_corruption", include_str!("../../presets/htru2_corruption.cfg")),
    ("toy_bounds", include_str!("../../presets/toy_bounds.cfg")),
    ("wine_corruption", include_str!("../../presets/wine_corruption.cfg")),
    ("wine_l1_bounds", include_str!("../../presets/wine_l1_bounds.cfg")),
    ("wine_l2_bounds", include_str!("../../presets/wine_l2_bounds.cfg")),
    ("wine_noise_n2", include_str!("../../presets/wine_noise_n2.cfg")),
    ("wine_noise_n3", include_str!("../../presets/wine_noise_n3.cfg")),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

pub fn preset_text(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let text = preset_text(name).ok_or_else(|| {
        Error::Config(format!(
            "no preset '{name}'; available: {}",
            preset_names().collect::<Vec<_>>().join(", ")
        ))
    })?;
    ExperimentConfig::parse(text).map_err(|e| e.context(&format!("preset {name}")))
}
