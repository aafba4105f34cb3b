//! How internal checks and ratings move the artist between development
//! states, and what that does to exploration and strictness.

use arcimboldo::agent::{AgentConfig, AgentState};

fn show(label: &str, s: &AgentState) {
    println!(
        "{label:<22} competence {:.3} certainty {:.3} activation {:.3} RL {:.3} radius {} tau {:.3} {}",
        s.urges.competence,
        s.urges.certainty,
        s.activation,
        s.resolution_level,
        s.exploration_radius(8),
        s.check_strictness(),
        s.development_state()
    );
}

fn main() -> arcimboldo::Result<()> {
    let mut s = AgentState::new(AgentConfig::default());
    show("fresh", &s);
    for _ in 0..4 {
        s.update_competence(true);
    }
    show("after 4 passes", &s);
    for _ in 0..4 {
        s.update_certainty(5)?;
    }
    show("after 4 five-star", &s);
    for _ in 0..6 {
        s.update_competence(false);
    }
    show("after 6 failures", &s);
    for _ in 0..3 {
        s.update_certainty(1)?;
    }
    show("after 3 one-star", &s);
    println!("history: {} events", s.history.len());
    Ok(())
}
