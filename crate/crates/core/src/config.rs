//! Run configuration and the `params` names that set it.

use crate::data::{Ms, Value};
use crate::declarative::RetrievalParams;
use crate::dsl::ast::Param;
use crate::dsl::diag::Diagnostic;
use crate::learning::UtilityParams;
use crate::symbol::Symbol;
use crate::wm::Mode;

/// What happens when a cycle finds nothing to do.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quiescence {
    /// Stop the run.
    End,
    /// Jump the clock to the next scheduled event.
    Wait,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub seed: u64,
    pub max_cycles: u64,
    pub cycle_ms: Ms,
    pub max_waves: usize,
    pub max_depth: usize,
    pub top_state: Symbol,
    pub quiescence: Quiescence,
    pub utility: UtilityParams,
    pub learning: bool,
    /// Softmax temperature over indifferent operator candidates.
    pub temperature: f64,
    pub retrieval: RetrievalParams,
    pub spontaneous: bool,
    pub associations: bool,
    pub compile: bool,
    pub chunking: bool,
    /// Times a chunk must be learned before it is kept.
    pub chunk_gate: u32,
    pub episodic: bool,
    pub wm_decay: Option<f64>,
    pub wm_forget_threshold: f64,
    pub rule_forget_threshold: Option<f64>,
}

impl RunConfig {
    pub fn defaults(mode: Mode) -> RunConfig {
        RunConfig {
            mode,
            seed: 0,
            max_cycles: 10_000,
            cycle_ms: 50,
            max_waves: 100,
            max_depth: 16,
            top_state: Symbol::named("s1"),
            quiescence: Quiescence::End,
            utility: match mode {
                Mode::Actr => UtilityParams::actr(),
                Mode::Soar => UtilityParams::soar(),
            },
            learning: true,
            temperature: 0.5,
            retrieval: RetrievalParams::default(),
            spontaneous: false,
            associations: false,
            compile: false,
            chunking: false,
            chunk_gate: 1,
            episodic: mode == Mode::Soar,
            wm_decay: None,
            wm_forget_threshold: -2.0,
            rule_forget_threshold: None,
        }
    }

    /// Applies `params` over the mode defaults. Unknown names and
    /// ill-typed values are reported and skipped.
    pub fn from_params(mode: Mode, params: &[Param]) -> (RunConfig, Vec<Diagnostic>) {
        let mut c = RunConfig::defaults(mode);
        let mut diags = Vec::new();
        for p in params {
            if let Err(message) = c.set(p.name.as_str(), &p.value) {
                diags.push(Diagnostic::error(p.span, message));
            }
        }
        (c, diags)
    }

    /// Sets one parameter by name.
    pub fn set(&mut self, name: &str, v: &Value) -> Result<(), String> {
        let num = || match v {
            Value::Num(n) if n.is_finite() => Ok(*n),
            _ => Err(format!("parameter `{name}` needs a number, got `{v}`")),
        };
        let count = || match v {
            Value::Num(n) if *n >= 0.0 && n.fract() == 0.0 && *n <= 1e15 => Ok(*n as u64),
            _ => Err(format!("parameter `{name}` needs a non-negative whole number, got `{v}`")),
        };
        let flag = || match v.as_symbol().map(Symbol::as_str) {
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            _ => Err(format!("parameter `{name}` needs `true` or `false`, got `{v}`")),
        };
        match name {
            "seed" => self.seed = count()?,
            "max-cycles" => self.max_cycles = count()?,
            "cycle-ms" => self.cycle_ms = count()?.max(1),
            "max-waves" => self.max_waves = count()? as usize,
            "max-depth" => self.max_depth = count()? as usize,
            "top-state" => match v {
                Value::Sym(s) if !s.is_innate() => self.top_state = s.clone(),
                _ => return Err(format!("parameter `{name}` needs a user symbol, got `{v}`")),
            },
            "quiescence" => {
                self.quiescence = match v.as_symbol().map(Symbol::as_str) {
                    Some("end") => Quiescence::End,
                    Some("wait") => Quiescence::Wait,
                    _ => return Err(format!("parameter `{name}` needs `end` or `wait`, got `{v}`")),
                }
            }
            "alpha" => self.utility.alpha = num()?,
            "noise" => self.utility.noise = num()?,
            "gamma" => self.utility.gamma = num()?,
            "init-utility" => self.utility.init_utility = num()?,
            "learning" => self.learning = flag()?,
            "temperature" => self.temperature = num()?,
            "dm-decay" => self.retrieval.decay = num()?,
            "dm-threshold" => self.retrieval.threshold = num()?,
            "dm-noise" => self.retrieval.noise = num()?,
            "latency-factor" => self.retrieval.latency_factor = num()?,
            "assoc-strength" => self.retrieval.assoc_strength = num()?,
            "spread-depth" => self.retrieval.depth = count()?.min(64) as u32,
            "blend-temperature" => self.retrieval.temperature = num()?,
            "inhibition-window" => self.retrieval.inhibition_window = count()?,
            "partial-matching" => self.retrieval.partial_matching = flag()?,
            "mismatch-penalty" => self.retrieval.mismatch_penalty = num()?,
            "spontaneous" => self.spontaneous = flag()?,
            "spontaneous-threshold" => self.retrieval.spontaneous_threshold = num()?,
            "associations" => self.associations = flag()?,
            "compile" => self.compile = flag()?,
            "chunking" => self.chunking = flag()?,
            "chunk-gate" => self.chunk_gate = count()?.clamp(1, u32::MAX as u64) as u32,
            "episodic" => self.episodic = flag()?,
            "wm-decay" => self.wm_decay = Some(num()?),
            "wm-forget-threshold" => self.wm_forget_threshold = num()?,
            "rule-forget-threshold" => self.rule_forget_threshold = Some(num()?),
            _ => {
                let hint = crate::dsl::suggest(name, PARAM_NAMES.iter().copied())
                    .map(|s| format!("; did you mean `{s}`?"))
                    .unwrap_or_default();
                return Err(format!("unknown parameter `{name}`{hint}"));
            }
        }
        Ok(())
    }
}

pub const PARAM_NAMES: [&str; 33] = [
    "seed",
    "max-cycles",
    "cycle-ms",
    "max-waves",
    "max-depth",
    "top-state",
    "quiescence",
    "alpha",
    "noise",
    "gamma",
    "init-utility",
    "learning",
    "temperature",
    "dm-decay",
    "dm-threshold",
    "dm-noise",
    "latency-factor",
    "assoc-strength",
    "spread-depth",
    "blend-temperature",
    "inhibition-window",
    "partial-matching",
    "mismatch-penalty",
    "spontaneous",
    "spontaneous-threshold",
    "associations",
    "compile",
    "chunking",
    "chunk-gate",
    "episodic",
    "wm-decay",
    "wm-forget-threshold",
    "rule-forget-threshold",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_defaults() {
        let a = RunConfig::defaults(Mode::Actr);
        assert_eq!(a.utility.alpha, 0.2);
        assert_eq!(a.utility.noise, 0.25);
        let s = RunConfig::defaults(Mode::Soar);
        assert_eq!((s.utility.alpha, s.utility.gamma), (0.3, 0.9));
        assert_eq!(s.retrieval.spontaneous_threshold, 2.0);
        assert_eq!((s.cycle_ms, s.max_waves), (50, 100));
    }

    #[test]
    fn every_listed_name_is_settable() {
        for name in PARAM_NAMES {
            let mut c = RunConfig::defaults(Mode::Soar);
            let ok = [Value::Num(1.0), Value::sym("true"), Value::sym("end"), Value::sym("s9")]
                .iter()
                .any(|v| c.set(name, v).is_ok());
            assert!(ok, "{name}");
        }
        let mut c = RunConfig::defaults(Mode::Soar);
        let e = c.set("aplha", &Value::Num(0.1)).unwrap_err();
        assert!(e.contains("did you mean `alpha`"), "{e}");
    }
}
