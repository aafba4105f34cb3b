//! Urges and motivation of the artist.
//!
//! Competence follows the internal evaluation of each artwork, Certainty
//! follows human ratings. Both feed a motivation level that sets the
//! activation; the resolution level is its complement and in turn fixes how
//! far the exploration reaches and how strict the analytic check is.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentConfig {
    pub activation_min: f64,
    pub activation_max: f64,
    /// EMA rate for both urges.
    pub alpha: f64,
    pub tau_lo: f64,
    pub tau_hi: f64,
    pub initial: Urges,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            activation_min: 0.2,
            activation_max: 0.9,
            alpha: 0.2,
            tau_lo: 0.35,
            tau_hi: 0.75,
            initial: Urges { competence: 0.3, certainty: 0.3 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Urges {
    pub competence: f64,
    pub certainty: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DevelopmentState {
    Beginner,
    Acclaimed,
    /// High competence, low certainty. Not a label the literature names.
    UnrecognizedTalent,
    /// Low competence, high certainty. Not a label the literature names.
    Complacent,
}

impl std::fmt::Display for DevelopmentState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            DevelopmentState::Beginner => "Beginner",
            DevelopmentState::Acclaimed => "Acclaimed",
            DevelopmentState::UnrecognizedTalent => "UnrecognizedTalent",
            DevelopmentState::Complacent => "Complacent",
        };
        f.write_str(s)
    }
}

/// Values at or above 0.5 count as high.
pub fn development_state(urges: &Urges) -> DevelopmentState {
    match (urges.competence >= 0.5, urges.certainty >= 0.5) {
        (false, false) => DevelopmentState::Beginner,
        (true, true) => DevelopmentState::Acclaimed,
        (true, false) => DevelopmentState::UnrecognizedTalent,
        (false, true) => DevelopmentState::Complacent,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AgentEventKind {
    InternalEvaluation { passed: bool },
    Rating { rating: u8 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentEvent {
    pub kind: AgentEventKind,
    /// Change of the affected urge.
    pub delta: f64,
    /// Logical clock, strictly increasing along the history.
    pub tick: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub config: AgentConfig,
    pub urges: Urges,
    pub activation: f64,
    pub resolution_level: f64,
    pub artworks_made: u64,
    pub history: Vec<AgentEvent>,
}

impl Default for AgentState {
    fn default() -> Self {
        AgentState::new(AgentConfig::default())
    }
}

impl AgentState {
    pub fn new(config: AgentConfig) -> Self {
        Self::with_urges(config, config.initial)
    }

    pub fn with_urges(config: AgentConfig, urges: Urges) -> Self {
        let mut s = AgentState {
            config,
            urges: Urges { competence: urges.competence.clamp(0.0, 1.0), certainty: urges.certainty.clamp(0.0, 1.0) },
            activation: 0.0,
            resolution_level: 1.0,
            artworks_made: 0,
            history: Vec::new(),
        };
        s.update_activation();
        s
    }

    /// Forces the activation (and its complementary resolution level) until
    /// the next urge update recomputes it.
    pub fn override_activation(&mut self, activation: f64) {
        self.activation = activation.clamp(0.0, 1.0);
        self.resolution_level = 1.0 - self.activation;
    }

    pub fn motivation(&self) -> f64 {
        0.5 * ((1.0 - self.urges.competence) + (1.0 - self.urges.certainty))
    }

    pub fn update_activation(&mut self) {
        let c = &self.config;
        let a = c.activation_min + (c.activation_max - c.activation_min) * self.motivation();
        self.override_activation(a);
    }

    /// round(r_max * activation): broad exploration when highly activated.
    pub fn exploration_radius(&self, r_max: usize) -> usize {
        (r_max as f64 * self.activation).round() as usize
    }

    /// Face-check threshold, strict at high resolution.
    pub fn check_strictness(&self) -> f64 {
        self.config.tau_lo + (self.config.tau_hi - self.config.tau_lo) * self.resolution_level
    }

    fn ema(&self, value: f64, target: f64) -> f64 {
        (value + self.config.alpha * (target - value)).clamp(0.0, 1.0)
    }

    fn log(&mut self, kind: AgentEventKind, delta: f64) {
        let tick = self.history.last().map_or(1, |e| e.tick + 1);
        self.history.push(AgentEvent { kind, delta, tick });
    }

    pub fn update_competence(&mut self, internal_eval_passed: bool) {
        let before = self.urges.competence;
        self.urges.competence = self.ema(before, if internal_eval_passed { 1.0 } else { 0.0 });
        self.log(AgentEventKind::InternalEvaluation { passed: internal_eval_passed }, self.urges.competence - before);
        self.update_activation();
    }

    pub fn update_certainty(&mut self, rating: u8) -> Result<()> {
        validate_rating(rating)?;
        let before = self.urges.certainty;
        self.urges.certainty = self.ema(before, (rating as f64 - 1.0) / 4.0);
        self.log(AgentEventKind::Rating { rating }, self.urges.certainty - before);
        self.update_activation();
        Ok(())
    }

    pub fn development_state(&self) -> DevelopmentState {
        development_state(&self.urges)
    }

    /// Equality up to how the two event streams were interleaved. Each urge
    /// only depends on its own events, so two states built from the same
    /// per-urge sequences agree on every value; only the ticks may differ.
    pub fn equivalent(&self, other: &AgentState) -> bool {
        let stream = |s: &AgentState, ratings: bool| -> Vec<(AgentEventKind, f64)> {
            s.history
                .iter()
                .filter(|e| matches!(e.kind, AgentEventKind::Rating { .. }) == ratings)
                .map(|e| (e.kind, e.delta))
                .collect()
        };
        self.config == other.config
            && self.urges == other.urges
            && self.activation == other.activation
            && self.resolution_level == other.resolution_level
            && self.artworks_made == other.artworks_made
            && stream(self, true) == stream(other, true)
            && stream(self, false) == stream(other, false)
    }
}

pub fn validate_rating(rating: u8) -> Result<()> {
    if (1..=5).contains(&rating) {
        Ok(())
    } else {
        Err(Error::invalid(format!("rating {rating} outside 1..=5")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(c: f64, ct: f64) -> AgentState {
        AgentState::with_urges(AgentConfig::default(), Urges { competence: c, certainty: ct })
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn activation_formula() {
        let s = at(1.0, 1.0);
        assert!(close(s.activation, 0.2) && close(s.resolution_level, 0.8));
        let s = at(0.0, 0.0);
        assert!(close(s.activation, 0.9) && close(s.resolution_level, 0.1));
        let s = at(0.5, 0.5);
        assert!(close(s.activation, 0.55) && close(s.resolution_level, 0.45));
    }

    #[test]
    fn radius_and_strictness() {
        let mut s = AgentState::default();
        s.override_activation(0.0);
        assert_eq!(s.exploration_radius(8), 0);
        assert!(close(s.check_strictness(), 0.75));
        s.override_activation(1.0);
        assert_eq!(s.exploration_radius(8), 8);
        assert!(close(s.check_strictness(), 0.35));
        s.override_activation(1.0 - 0.45);
        assert_eq!(s.exploration_radius(8), 4);
        s.override_activation(0.5);
        assert!(close(s.check_strictness(), 0.55));
    }

    #[test]
    fn competence_ema() {
        let mut s = at(0.5, 0.5);
        s.update_competence(true);
        assert!(close(s.urges.competence, 0.6));
        let mut s = at(0.5, 0.5);
        s.update_competence(false);
        assert!(close(s.urges.competence, 0.4));
        let mut s = at(0.1, 0.5);
        let mut last = s.urges.competence;
        for _ in 0..200 {
            s.update_competence(true);
            assert!(s.urges.competence >= last);
            last = s.urges.competence;
        }
        assert!(last > 0.999_999);
    }

    #[test]
    fn certainty_ema() {
        for (r, expect) in [(5, 0.6), (1, 0.4), (3, 0.5)] {
            let mut s = at(0.5, 0.5);
            s.update_certainty(r).unwrap();
            assert!(close(s.urges.certainty, expect), "rating {r}");
        }
        let mut s = at(0.5, 0.5);
        assert!(s.update_certainty(0).is_err());
        assert!(s.update_certainty(6).is_err());
        assert!(s.history.is_empty());
    }

    #[test]
    fn labels() {
        assert_eq!(development_state(&Urges { competence: 0.2, certainty: 0.2 }), DevelopmentState::Beginner);
        assert_eq!(development_state(&Urges { competence: 0.9, certainty: 0.9 }), DevelopmentState::Acclaimed);
        assert_eq!(development_state(&Urges { competence: 0.5, certainty: 0.5 }), DevelopmentState::Acclaimed);
        assert_eq!(development_state(&Urges { competence: 0.8, certainty: 0.1 }), DevelopmentState::UnrecognizedTalent);
        assert_eq!(development_state(&Urges { competence: 0.1, certainty: 0.8 }), DevelopmentState::Complacent);
        assert_eq!(AgentState::default().development_state(), DevelopmentState::Beginner);
    }

    #[test]
    fn history_ticks_increase() {
        let mut s = AgentState::default();
        s.update_competence(true);
        s.update_certainty(4).unwrap();
        s.update_competence(false);
        assert!(s.history.windows(2).all(|w| w[0].tick < w[1].tick));
        assert_eq!(s.history.len(), 3);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        #[derive(Debug, Clone)]
        enum Ev {
            Eval(bool),
            Rate(u8),
        }

        fn event() -> impl Strategy<Value = Ev> {
            prop_oneof![any::<bool>().prop_map(Ev::Eval), (1u8..=5).prop_map(Ev::Rate)]
        }

        proptest! {
            #[test]
            fn urges_stay_bounded_and_rl_complements(c in 0.0f64..=1.0, ct in 0.0f64..=1.0,
                                                     events in prop::collection::vec(event(), 0..60)) {
                let mut s = at(c, ct);
                for e in events {
                    match e {
                        Ev::Eval(p) => s.update_competence(p),
                        Ev::Rate(r) => s.update_certainty(r).unwrap(),
                    }
                    prop_assert!((0.0..=1.0).contains(&s.urges.competence));
                    prop_assert!((0.0..=1.0).contains(&s.urges.certainty));
                    prop_assert_eq!(s.resolution_level + s.activation, 1.0);
                }
            }

            #[test]
            fn higher_rating_never_lowers_certainty(c in 0.0f64..=1.0, ct in 0.0f64..=1.0, lo in 1u8..=4) {
                let mut a = at(c, ct);
                let mut b = a.clone();
                a.update_certainty(lo).unwrap();
                b.update_certainty(lo + 1).unwrap();
                prop_assert!(b.urges.certainty >= a.urges.certainty);
            }

            #[test]
            fn radius_non_increasing_in_rl(r_max in 0usize..40, steps in 2usize..50) {
                let mut s = AgentState::default();
                let mut last = usize::MAX;
                for i in 0..=steps {
                    s.override_activation(1.0 - i as f64 / steps as f64);
                    let r = s.exploration_radius(r_max);
                    prop_assert!(r <= last);
                    last = r;
                }
            }
        }
    }
}
