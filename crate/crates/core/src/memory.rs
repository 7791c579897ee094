//! Per-role reflection memory: short-term critic notes within one
//! collaboration, a long-term summary per generation, and the history of
//! earlier summaries.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::llm::Role;

/// Rendered in place of an empty history.
pub const NO_HISTORY: &str = "none yet";

/// Formats an objective for prompts; `None` marks an invalid candidate.
pub fn format_objective(obj: Option<f64>) -> String {
    match obj {
        Some(v) => format!("{v:.6}"),
        None => String::from("invalid"),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShortTermEntry {
    pub round: usize,
    pub reflection: String,
    /// Objective of the role's candidate before and after the round.
    pub prev_obj: Option<f64>,
    pub curr_obj: Option<f64>,
}

impl ShortTermEntry {
    pub fn delta(&self) -> Option<f64> {
        Some(self.curr_obj? - self.prev_obj?)
    }

    pub fn render(&self) -> String {
        let delta = match self.delta() {
            Some(d) => format!("{d:+.6}"),
            None => String::from("n/a"),
        };
        format!(
            "Round {}: {} (objective {} -> {}, change {delta})",
            self.round,
            self.reflection,
            format_objective(self.prev_obj),
            format_objective(self.curr_obj)
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RoleMemory {
    pub short_term: Vec<ShortTermEntry>,
    pub long_term: Option<String>,
    pub history: Vec<String>,
}

impl RoleMemory {
    pub fn render_short_term(&self) -> String {
        let lines: Vec<String> = self.short_term.iter().map(ShortTermEntry::render).collect();
        lines.join("\n")
    }

    pub fn render_history(&self) -> String {
        if self.history.is_empty() {
            return String::from(NO_HISTORY);
        }
        let lines: Vec<String> = self
            .history
            .iter()
            .enumerate()
            .map(|(i, h)| format!("Generation {}: {h}", i + 1))
            .collect();
        lines.join("\n")
    }

    /// Moves the current long-term summary into history and clears the
    /// short-term notes.
    pub fn end_generation(&mut self) {
        if let Some(lt) = self.long_term.take() {
            self.history.push(lt);
        }
        self.short_term.clear();
    }
}

/// Memories of the three roles that drive elite mutation.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MemoryBank {
    pub explorer: RoleMemory,
    pub exploiter: RoleMemory,
    pub integrator: RoleMemory,
}

impl MemoryBank {
    pub fn get(&self, role: Role) -> Option<&RoleMemory> {
        match role {
            Role::Explorer => Some(&self.explorer),
            Role::Exploiter => Some(&self.exploiter),
            Role::Integrator => Some(&self.integrator),
            Role::Critic => None,
        }
    }

    pub fn get_mut(&mut self, role: Role) -> Option<&mut RoleMemory> {
        match role {
            Role::Explorer => Some(&mut self.explorer),
            Role::Exploiter => Some(&mut self.exploiter),
            Role::Integrator => Some(&mut self.integrator),
            Role::Critic => None,
        }
    }

    /// Integrator summary built from the other two roles.
    pub fn merge_long_term(&mut self) {
        let parts: Vec<String> = [("Explorer", &self.explorer), ("Exploiter", &self.exploiter)]
            .into_iter()
            .filter_map(|(label, m)| m.long_term.as_ref().map(|lt| format!("{label}: {lt}")))
            .collect();
        self.integrator.long_term = (!parts.is_empty()).then(|| parts.join("\n"));
    }

    pub fn end_generation(&mut self) {
        self.explorer.end_generation();
        self.exploiter.end_generation();
        self.integrator.end_generation();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_term_render_carries_trace() {
        let e = ShortTermEntry {
            round: 2,
            reflection: "sharper".into(),
            prev_obj: Some(6.5),
            curr_obj: Some(6.25),
        };
        assert_eq!(e.render(), "Round 2: sharper (objective 6.500000 -> 6.250000, change -0.250000)");
        let bad = ShortTermEntry { curr_obj: None, ..e };
        assert!(bad.render().ends_with("-> invalid, change n/a)"));
    }

    #[test]
    fn history_grows_per_generation() {
        let mut bank = MemoryBank::default();
        assert_eq!(bank.explorer.render_history(), NO_HISTORY);
        bank.explorer.long_term = Some("a".into());
        bank.exploiter.long_term = Some("b".into());
        bank.merge_long_term();
        assert_eq!(bank.integrator.long_term.as_deref(), Some("Explorer: a\nExploiter: b"));
        bank.end_generation();
        bank.end_generation();
        assert_eq!(bank.explorer.history, ["a"]);
        assert_eq!(bank.integrator.render_history(), "Generation 1: Explorer: a\nExploiter: b");
    }
}
