#![allow(dead_code)]

use std::sync::Arc;

use agora_core::clock::{ManualClock, Timestamp};
use agora_core::gateways::mock::ScriptedChat;
use agora_core::gateways::Gateways;
use agora_core::ids::ImageId;
use agora_core::model::{Category, Mode, RankingDimension, RankingRecord, SurveyResponse};
use agora_core::session::{Command, Session, Studio};
use agora_core::wiki::FixtureWiki;

/// What one synthetic participant does. Arrays follow the session's stage
/// order: baseline first, then `order`.
pub struct Plan<'a> {
    pub id: &'a str,
    pub category: Category,
    pub order: [Mode; 3],
    pub rethinking: [u8; 4],
    pub statements: [&'a str; 4],
    pub replacements: [usize; 3],
    /// Rethinking ranks for baseline, diverse, reformulative, agonistic.
    pub ranks: [u32; 4],
}

pub fn studio() -> (Studio, Arc<ManualClock>) {
    let clock = Arc::new(ManualClock::new(Timestamp(1_700_000_000_000)));
    let gw = Gateways::offline(Arc::new(ScriptedChat::default()), clock.clone());
    (Studio::new(gw, Arc::new(FixtureWiki::new("/nonexistent"))), clock)
}

fn survey(stage: Mode, rethinking: u8) -> SurveyResponse {
    SurveyResponse {
        stage,
        satisfaction: 3,
        rethinking,
        appropriateness: 4,
        control: 3,
        interest: stage.collects_interest().then_some(4),
    }
}

/// Runs a full session without any language-model calls: images come from
/// baseline runs and from workspaces opened on free text.
pub fn run(plan: &Plan) -> Session {
    let (st, clock) = studio();
    let mut s = st
        .new_session(plan.id.into(), "a person", plan.category, Some(plan.order.to_vec()), None)
        .unwrap();
    let exec = |s: &mut Session, cmd: Command| {
        clock.advance(1000);
        st.execute(s, cmd).unwrap();
    };
    exec(&mut s, Command::RunStage { mode: Mode::Baseline, prompt: None });
    exec(&mut s, Command::RunStage { mode: Mode::Baseline, prompt: None });
    exec(&mut s, Command::RunStage { mode: Mode::Baseline, prompt: None });
    let first: Vec<ImageId> = s.images.keys().take(10).cloned().collect();
    exec(&mut s, Command::InitCollage { images: first });
    exec(&mut s, Command::DesignStatement { text: plan.statements[0].into() });
    exec(&mut s, Command::Survey { survey: survey(Mode::Baseline, plan.rethinking[0]) });
    for (k, mode) in plan.order.iter().enumerate() {
        let want = plan.replacements[k];
        if want > 0 {
            exec(&mut s, Command::OpenWorkspace { text: format!("{} variant", plan.id) });
            let mut fresh: Vec<ImageId> = Vec::new();
            while fresh.len() < want {
                exec(&mut s, Command::WorkspaceGenerate { text: format!("{} {mode} take {}", plan.id, fresh.len()) });
                fresh = s.images.iter().filter(|(_, m)| *m == mode).map(|(i, _)| i.clone()).collect();
            }
            for (slot, img) in fresh.into_iter().take(want).enumerate() {
                exec(&mut s, Command::ReplaceImage { slot, image: img });
            }
        }
        exec(&mut s, Command::DesignStatement { text: plan.statements[k + 1].into() });
        exec(&mut s, Command::Survey { survey: survey(*mode, plan.rethinking[k + 1]) });
    }
    for dimension in RankingDimension::ALL {
        let ranks = Mode::ALL.into_iter().zip(plan.ranks).collect();
        exec(&mut s, Command::Rankings { ranking: RankingRecord { dimension, ranks } });
    }
    assert!(s.finished);
    s
}
