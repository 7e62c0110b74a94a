//! TOML training configuration. Every field is optional and falls back to
//! [`TrainConfig::default`].

use std::path::Path;

use boxnn_core::TrainConfig;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: String,
        source: toml::de::Error,
    },
    #[error(transparent)]
    Invalid(#[from] boxnn_core::Error),
}

pub fn parse_config(text: &str, origin: &str) -> Result<TrainConfig, ConfigError> {
    let config: TrainConfig = toml::from_str(text).map_err(|source| ConfigError::Parse {
        path: origin.to_string(),
        source,
    })?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<TrainConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text, &path.display().to_string())
}

pub fn to_toml(config: &TrainConfig) -> String {
    toml::to_string(config).expect("config serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_config_uses_defaults() {
        let c = parse_config("tau = 2.5\nboxes = 20\n", "inline").unwrap();
        assert_eq!(c.tau, 2.5);
        assert_eq!(c.boxes, 20);
        assert_eq!(c.clip, 50.0);
    }

    #[test]
    fn unknown_and_invalid_fields_are_rejected() {
        assert!(matches!(
            parse_config("taw = 1.0", "inline"),
            Err(ConfigError::Parse { .. })
        ));
        assert!(matches!(
            parse_config("clip = -1.0", "inline"),
            Err(ConfigError::Invalid(_))
        ));
    }

    #[test]
    fn toml_round_trip() {
        let c = TrainConfig {
            seed: 42,
            stratified: true,
            ..TrainConfig::default()
        };
        assert_eq!(parse_config(&to_toml(&c), "inline").unwrap(), c);
    }
}
