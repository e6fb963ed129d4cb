use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::AgentSpec;

/// Source of normalized actions, one per joint.
pub trait Agent {
    fn act(&mut self, observation: &[f64], dof: usize) -> Vec<f64>;
}

pub struct RandomAgent {
    rng: ChaCha8Rng,
}

impl RandomAgent {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        RandomAgent { rng }
    }
}

impl Agent for RandomAgent {
    fn act(&mut self, _observation: &[f64], dof: usize) -> Vec<f64> {
        (0..dof).map(|_| self.rng.gen_range(-1.0..=1.0)).collect()
    }
}

pub struct ScriptAgent {
    actions: Vec<Vec<f64>>,
    next: usize,
}

impl ScriptAgent {
    pub fn new(actions: Vec<Vec<f64>>) -> Self {
        ScriptAgent { actions, next: 0 }
    }
}

impl Agent for ScriptAgent {
    /// Script entries are passed through unchanged; a wrong length fails in the gate.
    fn act(&mut self, _observation: &[f64], _dof: usize) -> Vec<f64> {
        let i = self.next.min(self.actions.len().saturating_sub(1));
        self.next += 1;
        self.actions.get(i).cloned().unwrap_or_default()
    }
}

pub fn make_agent(spec: &AgentSpec, seed: u64) -> Box<dyn Agent + Send> {
    match spec {
        AgentSpec::Random => Box::new(RandomAgent::new(seed)),
        AgentSpec::Script { actions } => Box::new(ScriptAgent::new(actions.clone())),
    }
}
