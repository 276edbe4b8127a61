//! Layered settings: built-in defaults, then a key=value file, then flags.

use std::path::{Path, PathBuf};

use contour_mend::{PipelineConfig, ThresholdMode};

use crate::error::CliError;

pub const CONFIG_ENV: &str = "CONTOUR_MEND_CONFIG";

/// One layer of settings. Unset fields leave the layer below untouched.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub threshold: Option<ThresholdMode>,
    pub median_passes: Option<usize>,
    pub window: Option<usize>,
    pub max_gap: Option<f64>,
    pub tail_k: Option<usize>,
    pub sample_step: Option<f64>,
    pub tie_epsilon: Option<f64>,
    pub dump_stages: Option<bool>,
    pub dump_paths: Option<bool>,
    pub timings: Option<bool>,
}

impl Overrides {
    /// `other` wins wherever it sets a field.
    pub fn then(self, other: Overrides) -> Overrides {
        Overrides {
            threshold: other.threshold.or(self.threshold),
            median_passes: other.median_passes.or(self.median_passes),
            window: other.window.or(self.window),
            max_gap: other.max_gap.or(self.max_gap),
            tail_k: other.tail_k.or(self.tail_k),
            sample_step: other.sample_step.or(self.sample_step),
            tie_epsilon: other.tie_epsilon.or(self.tie_epsilon),
            dump_stages: other.dump_stages.or(self.dump_stages),
            dump_paths: other.dump_paths.or(self.dump_paths),
            timings: other.timings.or(self.timings),
        }
    }

    /// Parses `key = value` lines. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str, origin: &Path) -> Result<Overrides, CliError> {
        let mut out = Overrides::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| CliError::Malformed(format!("{}:{}: {msg}", origin.display(), n + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| bad(format!("expected key = value, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "threshold" => out.threshold = Some(value.parse().map_err(bad)?),
                "median_passes" => out.median_passes = Some(parse_num(key, value).map_err(bad)?),
                "window" => out.window = Some(parse_num(key, value).map_err(bad)?),
                "max_gap" => out.max_gap = Some(parse_num(key, value).map_err(bad)?),
                "tail_k" => out.tail_k = Some(parse_num(key, value).map_err(bad)?),
                "sample_step" => out.sample_step = Some(parse_num(key, value).map_err(bad)?),
                "tie_epsilon" => out.tie_epsilon = Some(parse_num(key, value).map_err(bad)?),
                "dump_stages" => out.dump_stages = Some(parse_bool(key, value).map_err(bad)?),
                "dump_paths" => out.dump_paths = Some(parse_bool(key, value).map_err(bad)?),
                "timings" => out.timings = Some(parse_bool(key, value).map_err(bad)?),
                other => return Err(bad(format!("unknown key `{other}`"))),
            }
        }
        Ok(out)
    }

    /// Applies this layer to `base`.
    pub fn apply(&self, base: PipelineConfig) -> PipelineConfig {
        PipelineConfig {
            threshold: self.threshold.unwrap_or(base.threshold),
            median_passes: self.median_passes.unwrap_or(base.median_passes),
            window: self.window.unwrap_or(base.window),
            max_gap: self.max_gap.unwrap_or(base.max_gap),
            tail_k: self.tail_k.unwrap_or(base.tail_k),
            sample_step: self.sample_step.unwrap_or(base.sample_step),
            tie_epsilon: self.tie_epsilon.unwrap_or(base.tie_epsilon),
            dump_paths: self.dump_paths.unwrap_or(base.dump_paths),
            record_timings: self.timings.unwrap_or(base.record_timings),
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("`{key}` expects a number, got `{value}`"))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, String> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("`{key}` expects true or false, got `{value}`")),
    }
}

/// The config file named by `--config`, else by the environment.
pub fn config_path(flag: Option<&Path>) -> Option<PathBuf> {
    flag.map(Path::to_path_buf).or_else(|| std::env::var_os(CONFIG_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
}

/// Reads the file layer, or an empty layer when no file is configured.
pub fn load(flag: Option<&Path>) -> Result<Overrides, CliError> {
    match config_path(flag) {
        None => Ok(Overrides::default()),
        Some(path) => {
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            Overrides::parse(&text, &path)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Overrides, CliError> {
        Overrides::parse(text, Path::new("test.conf"))
    }

    #[test]
    fn parses_keys_comments_and_blank_lines() {
        let o = parse("# settings\n\nthreshold = 120\nwindow=7 # odd\nmax_gap = 42.5\ndump_paths = true\n").unwrap();
        assert_eq!(o.threshold, Some(ThresholdMode::Fixed(120)));
        assert_eq!(o.window, Some(7));
        assert_eq!(o.max_gap, Some(42.5));
        assert_eq!(o.dump_paths, Some(true));
        assert_eq!(o.median_passes, None);
    }

    #[test]
    fn reports_line_numbers_for_bad_input() {
        let err = parse("window = 7\nwindow = seven\n").unwrap_err();
        assert!(err.to_string().contains("test.conf:2"), "{err}");
        assert!(parse("colour = red\n").unwrap_err().to_string().contains("unknown key"));
        assert!(parse("just words\n").is_err());
        assert!(parse("timings = maybe\n").is_err());
    }

    #[test]
    fn later_layers_win_field_by_field() {
        let file = Overrides { window: Some(7), max_gap: Some(40.0), ..Overrides::default() };
        let flags = Overrides { max_gap: Some(20.0), ..Overrides::default() };
        let cfg = file.then(flags).apply(PipelineConfig::default());
        assert_eq!(cfg.window, 7);
        assert_eq!(cfg.max_gap, 20.0);
        assert_eq!(cfg.tail_k, PipelineConfig::default().tail_k);
    }
}
