//! Settings from flags, an optional TOML file and the environment.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

pub const WORKSPACE_ENV: &str = "COCART_WORKSPACE";
pub const CONFIG_NAME: &str = "cocart.toml";

/// Keys of `cocart.toml`; each mirrors a flag.
#[derive(Clone, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Config {
    pub workspace: Option<PathBuf>,
    pub seed: Option<u64>,
    pub max_word_len: Option<usize>,
    pub max_stages: Option<usize>,
    pub max_iterations: Option<usize>,
    pub json: Option<bool>,
    pub dot: Option<bool>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
        toml::from_str(&text).map_err(|e| CliError::Config { path: path.display().to_string(), message: e.to_string() })
    }

    /// Values from `self` where `over` has none.
    pub fn under(self, over: Config) -> Config {
        Config {
            workspace: over.workspace.or(self.workspace),
            seed: over.seed.or(self.seed),
            max_word_len: over.max_word_len.or(self.max_word_len),
            max_stages: over.max_stages.or(self.max_stages),
            max_iterations: over.max_iterations.or(self.max_iterations),
            json: over.json.or(self.json),
            dot: over.dot.or(self.dot),
        }
    }
}

/// Flag values, then the config file (explicit, or `cocart.toml` in the
/// workspace directory), then the environment for the directory.
pub fn settle(flags: Config, explicit: Option<&Path>, env_workspace: Option<PathBuf>) -> Result<Config, CliError> {
    let dir = flags.workspace.clone().or_else(|| env_workspace.clone()).unwrap_or_else(|| PathBuf::from("."));
    let file = match explicit {
        Some(p) => Some(Config::load(p)?),
        None => {
            let p = dir.join(CONFIG_NAME);
            if p.is_file() {
                Some(Config::load(&p)?)
            } else {
                None
            }
        }
    };
    let mut merged = file.unwrap_or_default().under(flags);
    if merged.workspace.is_none() {
        merged.workspace = env_workspace;
    }
    Ok(merged)
}

/// `path` relative to the workspace directory, unless absolute.
pub fn locate(cfg: &Config, path: &Path) -> PathBuf {
    match &cfg.workspace {
        Some(dir) if path.is_relative() => dir.join(path),
        _ => path.to_path_buf(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, text: &str) -> PathBuf {
        let p = dir.join(CONFIG_NAME);
        std::fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn flags_win_over_the_file() {
        let d = tempfile::tempdir().unwrap();
        write(d.path(), "seed = 4\nmax-word-len = 9\njson = true\n");
        let flags = Config { workspace: Some(d.path().into()), seed: Some(7), ..Config::default() };
        let c = settle(flags, None, None).unwrap();
        assert_eq!((c.seed, c.max_word_len, c.json), (Some(7), Some(9), Some(true)));
    }

    #[test]
    fn environment_only_names_the_directory() {
        let d = tempfile::tempdir().unwrap();
        write(d.path(), "max-stages = 3\n");
        let c = settle(Config::default(), None, Some(d.path().into())).unwrap();
        assert_eq!(c.max_stages, Some(3));
        assert_eq!(c.workspace.as_deref(), Some(d.path()));
        assert_eq!(locate(&c, Path::new("a.fincat")), d.path().join("a.fincat"));
        assert_eq!(locate(&c, Path::new("/x/a.fincat")), PathBuf::from("/x/a.fincat"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let d = tempfile::tempdir().unwrap();
        let p = write(d.path(), "sed = 4\n");
        assert!(matches!(settle(Config::default(), Some(&p), None), Err(CliError::Config { .. })));
    }

    #[test]
    fn missing_file_is_fine_unless_named() {
        let d = tempfile::tempdir().unwrap();
        assert_eq!(settle(Config::default(), None, Some(d.path().into())).unwrap().seed, None);
        assert!(matches!(settle(Config::default(), Some(&d.path().join("none.toml")), None), Err(CliError::Io { .. })));
    }
}
