//! Settings: built-in defaults, then an optional `key = value` file, then
//! the cache-directory environment variable, then command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::CliError;

pub const CACHE_DIR_ENV: &str = "VANISHING_CACHE_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Svg,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "svg" => Ok(OutputFormat::Svg),
            other => Err(format!("unknown format {other:?} (json or svg)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Config {
    pub cache_dir: PathBuf,
    /// `(s_max, t_max)` used when a prime's window is not given explicitly.
    pub windows: BTreeMap<u64, (usize, u32)>,
    pub stems: Option<PathBuf>,
    pub format: OutputFormat,
    pub threads: Option<usize>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            cache_dir: PathBuf::from("ext-cache"),
            windows: [(2, (10, 20)), (3, (7, 30)), (5, (5, 40))].into_iter().collect(),
            stems: None,
            format: OutputFormat::Json,
            threads: None,
        }
    }
}

fn bad(line: usize, msg: impl Into<String>) -> CliError {
    CliError::Config(format!("line {line}: {}", msg.into()))
}

impl Config {
    /// Window for `p`: configured, or the full column `2s(p-1) ≤ t_max` at
    /// the `p = 2` degree bound.
    pub fn window(&self, p: u64) -> (usize, u32) {
        if let Some(w) = self.windows.get(&p) {
            return *w;
        }
        let t_max = self.windows.get(&2).map_or(20, |w| w.1);
        (vanishing_core::cobar::full_column_s_max(p, t_max), t_max)
    }

    pub fn apply_file_text(&mut self, text: &str, base: &Path) -> Result<(), CliError> {
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| bad(line_no, "expected key = value"))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "cache_dir" => self.cache_dir = base.join(value),
                "stems" => self.stems = Some(base.join(value)),
                "format" => self.format = value.parse().map_err(|e: String| bad(line_no, e))?,
                "threads" => {
                    let n: usize = value.parse().map_err(|_| bad(line_no, "threads must be a positive integer"))?;
                    if n == 0 {
                        return Err(bad(line_no, "threads must be a positive integer"));
                    }
                    self.threads = Some(n);
                }
                _ if key.starts_with("window.") => {
                    let p: u64 = key["window.".len()..]
                        .parse()
                        .map_err(|_| bad(line_no, format!("bad prime in {key}")))?;
                    if !vanishing_core::linalg::is_prime(p) {
                        return Err(bad(line_no, format!("{p} is not a prime")));
                    }
                    let parts: Vec<&str> = value.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
                    let [s, t] = parts.as_slice() else {
                        return Err(bad(line_no, "window must be `s_max, t_max`"));
                    };
                    let s: usize = s.parse().map_err(|_| bad(line_no, "bad s_max"))?;
                    let t: u32 = t.parse().map_err(|_| bad(line_no, "bad t_max"))?;
                    self.windows.insert(p, (s, t));
                }
                _ => return Err(bad(line_no, format!("unknown key {key:?}"))),
            }
        }
        Ok(())
    }

    /// Defaults, then `file` (relative paths inside it resolve against its
    /// directory), then the environment override for the cache directory.
    pub fn load(file: Option<&Path>, env_cache_dir: Option<String>) -> Result<Config, CliError> {
        let mut config = Config::default();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            let base = path.parent().unwrap_or(Path::new(""));
            config.apply_file_text(&text, base)?;
        }
        if let Some(dir) = env_cache_dir.filter(|d| !d.is_empty()) {
            config.cache_dir = PathBuf::from(dir);
        }
        Ok(config)
    }

    /// Makes paths absolute and checks that referenced files exist.
    pub fn validate(mut self) -> Result<Config, CliError> {
        let cwd = std::env::current_dir().map_err(|e| CliError::Config(e.to_string()))?;
        if self.cache_dir.is_relative() {
            self.cache_dir = cwd.join(&self.cache_dir);
        }
        if self.cache_dir.exists() && !self.cache_dir.is_dir() {
            return Err(CliError::Config(format!("{} is not a directory", self.cache_dir.display())));
        }
        if let Some(stems) = &self.stems {
            let stems = if stems.is_relative() { cwd.join(stems) } else { stems.clone() };
            if !stems.is_file() {
                return Err(CliError::Config(format!("stems table {} not found", stems.display())));
            }
            self.stems = Some(stems);
        }
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_env() {
        let mut c = Config::default();
        c.apply_file_text("# settings\ncache_dir = c\nwindow.3 = 4, 16\nformat = svg\nthreads=2\n", Path::new("/base"))
            .unwrap();
        assert_eq!(c.cache_dir, PathBuf::from("/base/c"));
        assert_eq!(c.window(3), (4, 16));
        assert_eq!(c.window(7), (1, 20));
        assert_eq!(c.format, OutputFormat::Svg);
        assert_eq!(c.threads, Some(2));

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg");
        std::fs::write(&path, "cache_dir = from-file\n").unwrap();
        let c = Config::load(Some(&path), Some("/env/cache".into())).unwrap();
        assert_eq!(c.cache_dir, PathBuf::from("/env/cache"));
        let c = Config::load(Some(&path), None).unwrap();
        assert_eq!(c.cache_dir, dir.path().join("from-file"));
    }

    #[test]
    fn rejects_bad_lines() {
        for text in ["nonsense", "colour = red", "window.4 = 1, 2", "window.2 = 3", "threads = 0", "format = png"] {
            assert!(Config::default().apply_file_text(text, Path::new("")).is_err(), "{text}");
        }
    }
}
