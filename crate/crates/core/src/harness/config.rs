//! INI-style settings files.
//!
//! Keys outside any section apply to every method; a `[method]` section
//! (`[admm]`, `[newton-admm]`, ...) applies only to that method and wins over
//! the top level. Keys match the long CLI flags without the leading dashes,
//! e.g. `max-iterations = 500`; underscores are accepted too.
//!
//! ```ini
//! tol = 1e-9
//!
//! [admm]
//! alpha = 0.91
//! beta = 2.8
//! gamma = 0.0014
//! ```

use std::path::Path;
use std::str::FromStr;

use ini::{Ini, Properties};

use crate::error::{Error, Result};
use crate::problems::{Method, SolverSettings};

/// Recognized keys, in canonical form.
pub const SETTING_KEYS: &[&str] = &[
    "tol",
    "max-iterations",
    "alpha",
    "beta",
    "gamma",
    "linesearch",
    "mode",
    "inner-tol",
    "eta",
    "inner-max",
    "warm-start",
    "omega",
    "group-rows",
    "check-every",
];

pub fn load_settings(path: impl AsRef<Path>, method: Method) -> Result<SolverSettings> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_settings(&text, method).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Settings for `method` from INI text. Unknown sections or keys are errors.
pub fn parse_settings(text: &str, method: Method) -> Result<SolverSettings> {
    let ini = Ini::load_from_str(text).map_err(|e| Error::Parse { line: e.line, message: e.msg.to_string() })?;
    let mut settings = SolverSettings::default();
    for (section, props) in ini.iter() {
        let layer = props_to_settings(props)?;
        match section {
            None => settings = layer.merged(&settings),
            Some(name) => {
                let m = Method::from_str(name).map_err(|_| Error::Config(format!("unknown section [{name}]")))?;
                if m == method {
                    settings = settings.merged(&layer);
                }
            }
        }
    }
    Ok(settings)
}

fn props_to_settings(props: &Properties) -> Result<SolverSettings> {
    let mut s = SolverSettings::default();
    for (key, value) in props.iter() {
        apply_setting(&mut s, key, value)?;
    }
    Ok(s)
}

/// Sets one field from its key and textual value.
pub fn apply_setting(s: &mut SolverSettings, key: &str, value: &str) -> Result<()> {
    let canonical = key.trim().to_ascii_lowercase().replace('_', "-");
    let value = value.trim();
    let bad = |what: &str| Error::Config(format!("{canonical}: expected {what}, got '{value}'"));
    let float = || value.parse::<f64>().map_err(|_| bad("a number"));
    let count = || value.parse::<usize>().map_err(|_| bad("a non-negative integer"));
    match canonical.as_str() {
        "tol" => s.tol = Some(float()?),
        "max-iterations" => s.max_iterations = Some(count()?),
        "alpha" => s.alpha = Some(float()?),
        "beta" => s.beta = Some(float()?),
        "gamma" => s.gamma = Some(float()?),
        "linesearch" => s.linesearch = Some(value.parse()?),
        "mode" => s.mode = Some(value.parse()?),
        "inner-tol" => s.inner_tol = Some(float()?),
        "eta" => s.eta = Some(float()?),
        "inner-max" => s.inner_max = Some(count()?),
        "warm-start" => s.warm_start = Some(value.parse().map_err(|_| bad("true or false"))?),
        "omega" => s.omega = Some(float()?),
        "group-rows" => s.group_rows = Some(count()?),
        "check-every" => s.check_every = Some(count()?),
        _ => return Err(Error::Config(format!("unknown key '{key}'"))),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quasi_newton::LineSearch;

    const TEXT: &str = "tol = 1e-9\nmax_iterations = 40\n\n[admm]\nalpha = 0.91\nmax-iterations = 700\n\n[dfp]\nlinesearch = wolfe\n";

    #[test]
    fn sections_layer_over_the_top_level() {
        let admm = parse_settings(TEXT, Method::Admm).unwrap();
        assert_eq!(admm.tol, Some(1e-9));
        assert_eq!(admm.alpha, Some(0.91));
        assert_eq!(admm.max_iterations, Some(700));
        assert_eq!(admm.linesearch, None);

        let dfp = parse_settings(TEXT, Method::Dfp).unwrap();
        assert_eq!(dfp.max_iterations, Some(40));
        assert_eq!(dfp.linesearch, Some(LineSearch::Wolfe));
        assert_eq!(dfp.alpha, None);
    }

    #[test]
    fn rejects_unknown_names_and_bad_values() {
        assert!(matches!(parse_settings("speed = 3\n", Method::Ccom), Err(Error::Config(_))));
        assert!(matches!(parse_settings("[fancy]\ntol = 1\n", Method::Ccom), Err(Error::Config(_))));
        assert!(matches!(parse_settings("tol = tiny\n", Method::Ccom), Err(Error::Config(_))));
        assert!(matches!(parse_settings("warm-start = maybe\n", Method::NewtonAdmm), Err(Error::Config(_))));
    }

    #[test]
    fn every_key_is_accepted() {
        let values = ["1e-8", "10", "0.5", "1", "0.1", "armijo", "vectorized", "1e-9", "0.1", "9", "false", "0.2", "2", "5"];
        let mut s = SolverSettings::default();
        for (k, v) in SETTING_KEYS.iter().zip(values) {
            apply_setting(&mut s, k, v).unwrap();
        }
        assert_eq!(s.warm_start, Some(false));
        assert_eq!(s.check_every, Some(5));
    }
}
