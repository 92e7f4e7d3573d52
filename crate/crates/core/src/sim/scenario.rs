//! Scenario files: UTF-8 `key = value` lines grouped under `[world]`,
//! `[planner]`, `[sensor]` and `[keyframe]`. `#` starts a comment.
//!
//! ```text
//! [world]
//! name = village
//! map = village.pgm
//! start_x = 3.0
//! ...
//! [planner]
//! epsilon = 1.0
//! ```
//!
//! Paths are resolved relative to the scenario file.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::world::{Prior, SensorSpec};
use crate::costmap::LabelCostTable;
use crate::labels::MAX_LABEL;
use crate::planner::{PlannerConfig, ConfigError};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Syntax { path: PathBuf, line: usize, message: String },
    #[error("{path}: [{section}] {key}: {message}")]
    Key {
        path: PathBuf,
        section: String,
        key: String,
        message: String,
    },
    #[error("{path}: {source}")]
    Planner {
        path: PathBuf,
        #[source]
        source: ConfigError,
    },
    #[error("override {0:?}: expected KEY=VALUE")]
    Override(String),
    #[error("override key {0:?} matches no known scenario key")]
    UnknownOverride(String),
}

const SECTIONS: [&str; 4] = ["world", "planner", "sensor", "keyframe"];

const KEYS: &[(&str, &str)] = &[
    ("world", "name"),
    ("world", "map"),
    ("world", "start_x"),
    ("world", "start_y"),
    ("world", "start_theta"),
    ("world", "goal_x"),
    ("world", "goal_y"),
    ("world", "goal_radius"),
    ("world", "obstacle_labels"),
    ("world", "unreliable_labels"),
    ("world", "cost_overrides"),
    ("world", "prior"),
    ("world", "max_steps"),
    ("planner", "alpha"),
    ("planner", "beta"),
    ("planner", "gamma"),
    ("planner", "epsilon"),
    ("planner", "decay"),
    ("planner", "decay_clock"),
    ("planner", "cost_scaling"),
    ("planner", "dt"),
    ("planner", "horizon"),
    ("planner", "n_v"),
    ("planner", "n_omega"),
    ("planner", "v_min"),
    ("planner", "v_max"),
    ("planner", "omega_min"),
    ("planner", "omega_max"),
    ("planner", "a_lin"),
    ("planner", "a_ang"),
    ("planner", "d_max"),
    ("sensor", "footprint"),
    ("sensor", "offset"),
    ("keyframe", "weights"),
];

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    section: String,
    key: String,
    value: String,
    line: usize,
}

/// Parsed but uninterpreted scenario text.
#[derive(Debug, Clone, PartialEq)]
pub struct RawScenario {
    path: PathBuf,
    entries: Vec<Entry>,
}

impl RawScenario {
    pub fn parse(text: &str, path: &Path) -> Result<Self, ScenarioError> {
        let syntax = |line: usize, message: String| ScenarioError::Syntax {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut section: Option<String> = None;
        let mut entries: Vec<Entry> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| syntax(lineno, format!("unterminated section header {line:?}")))?
                    .trim();
                if !SECTIONS.contains(&name) {
                    return Err(syntax(lineno, format!("unknown section [{name}]")));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| syntax(lineno, format!("expected key = value, got {line:?}")))?;
            let section = section
                .clone()
                .ok_or_else(|| syntax(lineno, "key outside of any section".into()))?;
            let key = key.trim().to_string();
            if !KEYS.contains(&(section.as_str(), key.as_str())) {
                return Err(syntax(lineno, format!("unknown key {key:?} in [{section}]")));
            }
            if entries.iter().any(|e| e.section == section && e.key == key) {
                return Err(syntax(lineno, format!("duplicate key {key:?} in [{section}]")));
            }
            entries.push(Entry {
                section,
                key,
                value: value.trim().to_string(),
                line: lineno,
            });
        }
        Ok(Self {
            path: path.to_path_buf(),
            entries,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|e| e.section == section && e.key == key)
            .map(|e| e.value.as_str())
    }

    /// Apply `KEY=VALUE` where KEY is `section.key` or a bare key that is
    /// unique across sections.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), ScenarioError> {
        let (key, value) = spec
            .split_once('=')
            .ok_or_else(|| ScenarioError::Override(spec.to_string()))?;
        let key = key.trim();
        let (section, key) = match key.split_once('.') {
            Some((s, k)) => (s, k),
            None => {
                let mut hits = KEYS.iter().filter(|(_, k)| *k == key);
                match (hits.next(), hits.next()) {
                    (Some((s, _)), None) => (*s, key),
                    _ => return Err(ScenarioError::UnknownOverride(key.to_string())),
                }
            }
        };
        if !KEYS.contains(&(section, key)) {
            return Err(ScenarioError::UnknownOverride(format!("{section}.{key}")));
        }
        let value = value.trim().to_string();
        match self.entries.iter_mut().find(|e| e.section == section && e.key == key) {
            Some(e) => e.value = value,
            None => self.entries.push(Entry {
                section: section.to_string(),
                key: key.to_string(),
                value,
                line: 0,
            }),
        }
        Ok(())
    }

    fn key_err(&self, section: &str, key: &str, message: impl Into<String>) -> ScenarioError {
        ScenarioError::Key {
            path: self.path.clone(),
            section: section.to_string(),
            key: key.to_string(),
            message: message.into(),
        }
    }

    fn required(&self, section: &str, key: &str) -> Result<&str, ScenarioError> {
        self.get(section, key)
            .ok_or_else(|| self.key_err(section, key, "missing required key"))
    }

    fn parsed<T: std::str::FromStr>(&self, section: &str, key: &str, default: Option<T>) -> Result<T, ScenarioError>
    where
        T::Err: std::fmt::Display,
    {
        match (self.get(section, key), default) {
            (Some(v), _) => v
                .parse()
                .map_err(|e: T::Err| self.key_err(section, key, format!("cannot parse {v:?}: {e}"))),
            (None, Some(d)) => Ok(d),
            (None, None) => Err(self.key_err(section, key, "missing required key")),
        }
    }

    fn label_set(&self, key: &str) -> Result<BTreeSet<u8>, ScenarioError> {
        let Some(v) = self.get("world", key) else {
            return Ok(BTreeSet::new());
        };
        v.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| match s.parse::<u8>() {
                Ok(l) if l <= MAX_LABEL => Ok(l),
                _ => Err(self.key_err("world", key, format!("invalid label {s:?}"))),
            })
            .collect()
    }

    fn cost_table(&self) -> Result<LabelCostTable, ScenarioError> {
        let mut table = LabelCostTable::linear();
        let Some(v) = self.get("world", "cost_overrides") else {
            return Ok(table);
        };
        for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let bad = || self.key_err("world", "cost_overrides", format!("expected label:cost, got {item:?}"));
            let (l, c) = item.split_once(':').ok_or_else(bad)?;
            let label: u8 = l.trim().parse().map_err(|_| bad())?;
            let cost: f64 = c.trim().parse().map_err(|_| bad())?;
            table = table
                .with_override(label, cost)
                .map_err(|e| self.key_err("world", "cost_overrides", e.to_string()))?;
        }
        Ok(table)
    }

    /// Interpret every section.
    pub fn resolve(&self) -> Result<Scenario, ScenarioError> {
        let base = self.path.parent().unwrap_or(Path::new("."));
        let d = PlannerConfig::default();
        let p = |k: &str, def: f64| self.parsed::<f64>("planner", k, Some(def));
        let planner = PlannerConfig {
            weights: crate::planner::ObjectiveWeights {
                alpha: p("alpha", d.weights.alpha)?,
                beta: p("beta", d.weights.beta)?,
                gamma: p("gamma", d.weights.gamma)?,
                epsilon: p("epsilon", d.weights.epsilon)?,
            },
            decay: p("decay", d.decay)?,
            decay_clock: self.parsed("planner", "decay_clock", Some(d.decay_clock))?,
            cost_scaling: self.parsed("planner", "cost_scaling", Some(d.cost_scaling))?,
            dt: p("dt", d.dt)?,
            horizon: p("horizon", d.horizon)?,
            n_v: self.parsed("planner", "n_v", Some(d.n_v))?,
            n_omega: self.parsed("planner", "n_omega", Some(d.n_omega))?,
            d_max: p("d_max", d.d_max)?,
            limits: crate::planner::KinodynamicLimits {
                v_min: p("v_min", d.limits.v_min)?,
                v_max: p("v_max", d.limits.v_max)?,
                omega_min: p("omega_min", d.limits.omega_min)?,
                omega_max: p("omega_max", d.limits.omega_max)?,
                a_lin: p("a_lin", d.limits.a_lin)?,
                a_ang: p("a_ang", d.limits.a_ang)?,
            },
        };
        planner.validate().map_err(|source| ScenarioError::Planner {
            path: self.path.clone(),
            source,
        })?;
        let sd = SensorSpec::default();
        let sensor = SensorSpec {
            footprint: self.parsed("sensor", "footprint", Some(sd.footprint))?,
            offset: self.parsed("sensor", "offset", Some(sd.offset))?,
        };
        if sensor.footprint % 2 == 0 {
            return Err(self.key_err("sensor", "footprint", "must be odd and at least 1"));
        }
        let goal_radius: f64 = self.parsed("world", "goal_radius", Some(0.5))?;
        if !(goal_radius.is_finite() && goal_radius >= 0.0) {
            return Err(self.key_err("world", "goal_radius", "must be nonnegative"));
        }
        Ok(Scenario {
            path: self.path.clone(),
            name: self.get("world", "name").unwrap_or("world").to_string(),
            map: base.join(self.required("world", "map")?),
            start: (
                self.parsed("world", "start_x", None)?,
                self.parsed("world", "start_y", None)?,
                self.parsed("world", "start_theta", Some(0.0))?,
            ),
            goal: (self.parsed("world", "goal_x", None)?, self.parsed("world", "goal_y", None)?),
            goal_radius,
            obstacle_labels: self.label_set("obstacle_labels")?,
            unreliable_labels: self.label_set("unreliable_labels")?,
            cost_table: self.cost_table()?,
            prior: self.parsed("world", "prior", Some(Prior::Unknown))?,
            max_steps: self.parsed("world", "max_steps", Some(1000))?,
            planner,
            sensor,
            keyframe_weights: self.get("keyframe", "weights").map(|w| base.join(w)),
        })
    }

    /// One-line `key=value` summary of the effective planner settings.
    pub fn planner_summary(&self) -> Result<String, ScenarioError> {
        let s = self.resolve()?;
        Ok(planner_summary(&s.planner))
    }
}

pub fn planner_summary(c: &PlannerConfig) -> String {
    let mut out = String::new();
    let w = &c.weights;
    let l = &c.limits;
    write!(
        out,
        "alpha={} beta={} gamma={} epsilon={} decay={} decay_clock={} cost_scaling={} dt={} horizon={} \
         n_v={} n_omega={} v_min={} v_max={} omega_min={} omega_max={} a_lin={} a_ang={} d_max={}",
        w.alpha,
        w.beta,
        w.gamma,
        w.epsilon,
        c.decay,
        c.decay_clock,
        c.cost_scaling,
        c.dt,
        c.horizon,
        c.n_v,
        c.n_omega,
        l.v_min,
        l.v_max,
        l.omega_min,
        l.omega_max,
        l.a_lin,
        l.a_ang,
        c.d_max
    )
    .unwrap();
    out
}

/// Fully interpreted scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub path: PathBuf,
    pub name: String,
    pub map: PathBuf,
    pub start: (f64, f64, f64),
    pub goal: (f64, f64),
    pub goal_radius: f64,
    pub obstacle_labels: BTreeSet<u8>,
    pub unreliable_labels: BTreeSet<u8>,
    pub cost_table: LabelCostTable,
    pub prior: Prior,
    pub max_steps: usize,
    pub planner: PlannerConfig,
    pub sensor: SensorSpec,
    pub keyframe_weights: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::DecayClock;

    const TEXT: &str = "\
# test scenario
[world]
name = demo
map = demo.pgm
start_x = 1.0
start_y = 2.0   # trailing comment
goal_x = 8
goal_y = 2
obstacle_labels = 9, 17
unreliable_labels = 1,5
cost_overrides = 0:0.5, 5:1.0

[planner]
epsilon = 2.5
decay_clock = rollout

[sensor]
footprint = 9
";

    fn raw() -> RawScenario {
        RawScenario::parse(TEXT, Path::new("/tmp/s/demo.toy")).unwrap()
    }

    #[test]
    fn parses_and_resolves() {
        let s = raw().resolve().unwrap();
        assert_eq!(s.name, "demo");
        assert_eq!(s.map, PathBuf::from("/tmp/s/demo.pgm"));
        assert_eq!(s.start, (1.0, 2.0, 0.0));
        assert_eq!(s.goal, (8.0, 2.0));
        assert_eq!(s.obstacle_labels, BTreeSet::from([9, 17]));
        assert_eq!(s.unreliable_labels, BTreeSet::from([1, 5]));
        assert_eq!(s.cost_table.cost(0).unwrap(), 0.5);
        assert_eq!(s.cost_table.cost(5).unwrap(), 1.0);
        assert_eq!(s.cost_table.cost(11).unwrap(), 0.5);
        assert_eq!(s.planner.weights.epsilon, 2.5);
        assert_eq!(s.planner.decay_clock, DecayClock::Rollout);
        assert_eq!(s.sensor.footprint, 9);
        assert_eq!(s.prior, Prior::Unknown);
    }

    #[test]
    fn overrides() {
        let mut r = raw();
        r.apply_override("epsilon=0").unwrap();
        r.apply_override("world.goal_radius = 2").unwrap();
        r.apply_override("sensor.offset=1.5").unwrap();
        let s = r.resolve().unwrap();
        assert_eq!(s.planner.weights.epsilon, 0.0);
        assert_eq!(s.goal_radius, 2.0);
        assert_eq!(s.sensor.offset, 1.5);
        assert!(r.planner_summary().unwrap().contains(" epsilon=0 "));
        assert!(matches!(r.apply_override("nonsense=1"), Err(ScenarioError::UnknownOverride(_))));
        assert!(matches!(r.apply_override("epsilon"), Err(ScenarioError::Override(_))));
    }

    #[test]
    fn syntax_errors_name_the_line() {
        let p = Path::new("x.toy");
        let err = RawScenario::parse("[world]\nname demo\n", p).unwrap_err();
        assert!(err.to_string().contains("x.toy:2"), "{err}");
        assert!(RawScenario::parse("name = a\n", p).is_err());
        assert!(RawScenario::parse("[galaxy]\n", p).is_err());
        assert!(RawScenario::parse("[world]\nspeed = 3\n", p).is_err());
        assert!(RawScenario::parse("[world]\nname = a\nname = b\n", p).is_err());
    }

    #[test]
    fn key_errors_name_the_key() {
        let mut r = raw();
        r.apply_override("alpha=fast").unwrap();
        let err = r.resolve().unwrap_err().to_string();
        assert!(err.contains("alpha") && err.contains("demo.toy"), "{err}");

        let mut r = raw();
        r.apply_override("obstacle_labels=40").unwrap();
        assert!(r.resolve().unwrap_err().to_string().contains("obstacle_labels"));

        let mut r = raw();
        r.apply_override("footprint=8").unwrap();
        assert!(r.resolve().is_err());

        let mut r = raw();
        r.apply_override("horizon=1.1").unwrap();
        assert!(matches!(r.resolve(), Err(ScenarioError::Planner { .. })));
    }
}
