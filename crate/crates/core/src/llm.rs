//! Language-model interface: roles, requests, budgets and a deterministic mock.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{self, Tier};
use crate::heuristic::{Framework, HeuristicSignature, Setting};
use crate::problem::ProblemKind;
pub use crate::prompt::TemplateId;
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Explorer,
    Exploiter,
    Critic,
    Integrator,
}

impl Role {
    pub fn temperature(self) -> f64 {
        match self {
            Role::Explorer => 1.3,
            Role::Exploiter => 0.8,
            Role::Critic | Role::Integrator => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Role::Explorer => "explorer",
            Role::Exploiter => "exploiter",
            Role::Critic => "critic",
            Role::Integrator => "integrator",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which budget a completion is charged to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CallClass {
    /// Completions expected to yield a heuristic.
    Heuristic,
    /// Critic and reflection completions.
    Auxiliary,
}

impl CallClass {
    pub fn of(template: TemplateId) -> Self {
        if template.produces_heuristic() {
            CallClass::Heuristic
        } else {
            CallClass::Auxiliary
        }
    }
}

/// Temperature for requests that are not tied to a collaboration role.
pub const DEFAULT_TEMPERATURE: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub template_id: TemplateId,
    pub prompt: String,
    pub temperature: f64,
    pub role: Option<Role>,
    pub generation: usize,
}

impl ChatRequest {
    pub fn new(template_id: TemplateId, prompt: String, role: Option<Role>, generation: usize) -> Self {
        Self {
            template_id,
            prompt,
            temperature: role.map_or(DEFAULT_TEMPERATURE, Role::temperature),
            role,
            generation,
        }
    }

    pub fn class(&self) -> CallClass {
        CallClass::of(self.template_id)
    }

    pub fn prompt_sha256(&self) -> String {
        hex::encode(Sha256::digest(self.prompt.as_bytes()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LlmError {
    /// The budget for this call class is spent; the run must end.
    BudgetExhausted { class: CallClass, cap: usize },
    /// Transport failed after retries; only the current candidate is lost.
    Transport(String),
    /// A replayed transcript does not match the request stream.
    Replay(String),
}

impl LlmError {
    pub fn is_terminal(&self) -> bool {
        !matches!(self, LlmError::Transport(_))
    }
}

impl fmt::Display for LlmError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LlmError::BudgetExhausted { class, cap } => write!(f, "{class:?} call budget of {cap} exhausted"),
            LlmError::Transport(m) => write!(f, "transport failure: {m}"),
            LlmError::Replay(m) => write!(f, "replay mismatch: {m}"),
        }
    }
}

pub trait LanguageModel {
    fn complete(&mut self, request: &ChatRequest) -> Result<String, LlmError>;
}

impl<M: LanguageModel + ?Sized> LanguageModel for &mut M {
    fn complete(&mut self, request: &ChatRequest) -> Result<String, LlmError> {
        (**self).complete(request)
    }
}

impl<M: LanguageModel + ?Sized> LanguageModel for Box<M> {
    fn complete(&mut self, request: &ChatRequest) -> Result<String, LlmError> {
        (**self).complete(request)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub cap: usize,
    pub used: usize,
}

impl Budget {
    pub fn new(cap: usize) -> Self {
        Self { cap, used: 0 }
    }

    pub fn exhausted(&self) -> bool {
        self.used >= self.cap
    }

    pub fn remaining(&self) -> usize {
        self.cap - self.used
    }
}

/// Enforces separate caps on heuristic and auxiliary completions.
///
/// A call is charged only when the inner model returns a response.
pub struct Metered<M> {
    inner: M,
    pub heuristic: Budget,
    pub auxiliary: Budget,
}

impl<M: LanguageModel> Metered<M> {
    pub fn new(inner: M, heuristic_cap: usize, auxiliary_cap: usize) -> Self {
        Self {
            inner,
            heuristic: Budget::new(heuristic_cap),
            auxiliary: Budget::new(auxiliary_cap),
        }
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }

    pub fn inner_mut(&mut self) -> &mut M {
        &mut self.inner
    }

    pub fn into_inner(self) -> M {
        self.inner
    }

    pub fn budget(&self, class: CallClass) -> &Budget {
        match class {
            CallClass::Heuristic => &self.heuristic,
            CallClass::Auxiliary => &self.auxiliary,
        }
    }

    pub fn total_used(&self) -> usize {
        self.heuristic.used + self.auxiliary.used
    }
}

impl<M: LanguageModel> LanguageModel for Metered<M> {
    fn complete(&mut self, request: &ChatRequest) -> Result<String, LlmError> {
        let class = request.class();
        let budget = match class {
            CallClass::Heuristic => &mut self.heuristic,
            CallClass::Auxiliary => &mut self.auxiliary,
        };
        if budget.exhausted() {
            return Err(LlmError::BudgetExhausted { class, cap: budget.cap });
        }
        let response = self.inner.complete(request)?;
        budget.used += 1;
        Ok(response)
    }
}

/// Deterministic stand-in for a language model.
///
/// In canned mode each template id maps to a fixed response. In generative
/// mode heuristic responses are drawn from the corpus and its parameterized
/// family for the configured problem, keyed by a seed and the call count, so
/// a run sees a varied but reproducible stream.
#[derive(Clone, Debug)]
pub struct MockModel {
    mode: MockMode,
    calls: u64,
}

#[derive(Clone, Debug)]
enum MockMode {
    Canned(BTreeMap<TemplateId, String>, String),
    Generative(MockProfile),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MockProfile {
    pub kind: ProblemKind,
    pub setting: Setting,
    pub framework: Framework,
    pub seed: u64,
    /// Fraction of heuristic responses that carry a broken program.
    pub invalid_rate: f64,
}

/// Wraps a description and source in the expected response layout.
pub fn format_heuristic_response(description: &str, source: &str) -> String {
    format!("{{{description}}}\n\n```python\n{}\n```\n", source.trim_end())
}

const MOCK_BROKEN: &str = "def heuristics(*args):\n    raise ValueError('unsupported input')\n";

const MOCK_REFLECTIONS: [&str; 4] = [
    "Sharper distance penalties concentrate ants on short edges.",
    "Smoothing extreme scores keeps exploration alive.",
    "Avoid normalizations that flatten differences between candidates.",
    "Combining local cost with a global scale rewards consistent choices.",
];

const MOCK_CRITIQUES: [&str; 4] = [
    "Raise the exponent on the cost term and keep the offset small.",
    "Lower the exponent slightly to reduce premature convergence.",
    "Guard the denominator and reuse the stronger parent's core formula.",
    "Keep the structure but tune the constants against the better code.",
];

impl MockModel {
    pub fn canned(responses: BTreeMap<TemplateId, String>, fallback: impl Into<String>) -> Self {
        Self {
            mode: MockMode::Canned(responses, fallback.into()),
            calls: 0,
        }
    }

    /// Always answers with the same text.
    pub fn constant(response: impl Into<String>) -> Self {
        Self::canned(BTreeMap::new(), response)
    }

    pub fn generative(profile: MockProfile) -> Self {
        Self {
            mode: MockMode::Generative(profile),
            calls: 0,
        }
    }

    pub fn for_signature(signature: &HeuristicSignature, seed: u64) -> Self {
        Self::generative(MockProfile {
            kind: signature.kind,
            setting: signature.setting,
            framework: signature.framework,
            seed,
            invalid_rate: 0.1,
        })
    }

    pub fn calls(&self) -> u64 {
        self.calls
    }

    fn generate(profile: &MockProfile, calls: u64, request: &ChatRequest) -> String {
        let mut r = rng::stream(rng::derive(profile.seed, request.template_id.as_str()), calls);
        if !request.template_id.produces_heuristic() {
            let reflection = MOCK_REFLECTIONS[r.random_range(0..MOCK_REFLECTIONS.len())];
            let critique = MOCK_CRITIQUES[r.random_range(0..MOCK_CRITIQUES.len())];
            return match request.template_id {
                TemplateId::LtReflect => format!("Considering the trend step by step.\n<ans>{reflection} {critique}</ans>"),
                _ => format!("Step by step, the comparison shows a clear pattern.\n<ref>{reflection}</ref>\n<ans>{critique}</ans>"),
            };
        }
        if r.random::<f64>() < profile.invalid_rate {
            return format_heuristic_response("A variant that cannot handle its inputs.", MOCK_BROKEN);
        }
        let pick = r.random_range(0..10u32);
        let entry_tier = match pick {
            0 => Some(Tier::Vanilla),
            1 => Some(Tier::Best),
            _ => None,
        };
        if let Some(tier) = entry_tier {
            if let Some(e) = corpus::find(profile.kind, profile.setting, profile.framework, tier) {
                return format_heuristic_response(e.description, e.source);
            }
        }
        match corpus::family(profile.kind, profile.setting) {
            Some(fam) => {
                let p = f64::from(r.random_range(2..=16u32)) * 0.25;
                let eps = [1e-6, 1e-4, 1e-2][r.random_range(0..3)];
                format_heuristic_response(
                    &format!("Inverse power scoring with exponent {p} and offset {eps}."),
                    &fam.render(p, eps),
                )
            }
            None => format_heuristic_response("A variant that cannot handle its inputs.", MOCK_BROKEN),
        }
    }
}

impl LanguageModel for MockModel {
    fn complete(&mut self, request: &ChatRequest) -> Result<String, LlmError> {
        let calls = self.calls;
        self.calls += 1;
        Ok(match &self.mode {
            MockMode::Canned(map, fallback) => map.get(&request.template_id).unwrap_or(fallback).clone(),
            MockMode::Generative(profile) => Self::generate(profile, calls, request),
        })
    }
}

/// Serves pre-recorded responses in order.
#[derive(Clone, Debug, Default)]
pub struct ScriptedModel {
    responses: Vec<String>,
    next: usize,
}

impl ScriptedModel {
    pub fn new(responses: Vec<String>) -> Self {
        Self { responses, next: 0 }
    }
}

impl LanguageModel for ScriptedModel {
    fn complete(&mut self, _request: &ChatRequest) -> Result<String, LlmError> {
        let r = self
            .responses
            .get(self.next)
            .cloned()
            .ok_or_else(|| LlmError::Replay("script exhausted".to_string()))?;
        self.next += 1;
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(id: TemplateId, role: Option<Role>) -> ChatRequest {
        ChatRequest::new(id, "p".into(), role, 0)
    }

    #[test]
    fn role_temperatures() {
        assert_eq!(req(TemplateId::Explorer, Some(Role::Explorer)).temperature, 1.3);
        assert_eq!(req(TemplateId::Exploiter, Some(Role::Exploiter)).temperature, 0.8);
        assert_eq!(req(TemplateId::CriticInitial, Some(Role::Critic)).temperature, 1.0);
        assert_eq!(req(TemplateId::Integrator, Some(Role::Integrator)).temperature, 1.0);
        assert_eq!(req(TemplateId::EohE1, None).temperature, 1.0);
    }

    #[test]
    fn budgets_are_separate_and_hard() {
        let mut m = Metered::new(MockModel::constant("x"), 2, 1);
        let h = req(TemplateId::EohInit, None);
        let a = req(TemplateId::CriticInitial, Some(Role::Critic));
        assert!(m.complete(&h).is_ok());
        assert!(m.complete(&a).is_ok());
        assert!(m.complete(&h).is_ok());
        assert_eq!(
            m.complete(&h),
            Err(LlmError::BudgetExhausted {
                class: CallClass::Heuristic,
                cap: 2
            })
        );
        assert!(m.complete(&a).unwrap_err().is_terminal());
        assert_eq!((m.heuristic.used, m.auxiliary.used), (2, 1));
    }

    #[test]
    fn generative_mock_is_reproducible() {
        let sig = HeuristicSignature::new(ProblemKind::Tsp, Setting::WhiteBox, Framework::Aco).unwrap();
        let run = || {
            let mut m = MockModel::for_signature(&sig, 3);
            (0..20)
                .map(|i| {
                    let id = if i % 3 == 0 { TemplateId::CriticBetter } else { TemplateId::EohE2 };
                    m.complete(&req(id, None)).unwrap()
                })
                .collect::<Vec<_>>()
        };
        let a = run();
        assert_eq!(a, run());
        assert!(a[0].contains("<ref>") && a[0].contains("<ans>"));
        assert!(a[1].contains("```python"));
    }
}
