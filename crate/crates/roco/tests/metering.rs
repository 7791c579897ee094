use proptest::prelude::*;

use roco::gateway::{Recorder, ReplayModel};
use roco_core::llm::{CallClass, ChatRequest, LanguageModel, LlmError, Metered, MockModel, TemplateId};

proptest! {
    #[test]
    fn used_counts_track_the_transcript(
        picks in prop::collection::vec(0usize..TemplateId::ALL.len(), 0..80),
        hcap in 0usize..30,
        acap in 0usize..30,
    ) {
        let mut llm = Metered::new(Recorder::new(MockModel::constant("<ans>x</ans>")), hcap, acap);
        for (i, &p) in picks.iter().enumerate() {
            let template = TemplateId::ALL[p];
            let req = ChatRequest::new(template, format!("prompt {i}"), None, 0);
            let r = llm.complete(&req);
            prop_assert_eq!(llm.total_used(), llm.inner().records().len());
            prop_assert!(llm.heuristic.used <= hcap && llm.auxiliary.used <= acap);
            if let Err(e) = r {
                let class = CallClass::of(template);
                let hit = matches!(e, LlmError::BudgetExhausted { class: c, .. } if c == class);
                prop_assert!(hit);
                prop_assert_eq!(llm.budget(class).used, llm.budget(class).cap);
            }
        }
        let records = llm.inner().records().to_vec();
        let mut replay = ReplayModel::new(records.clone());
        for rec in &records {
            let req = ChatRequest::new(rec.template_id, rec.prompt.clone(), None, 0);
            prop_assert_eq!(replay.complete(&req).unwrap(), rec.response.clone());
        }
        prop_assert_eq!(replay.remaining(), 0);
    }
}
