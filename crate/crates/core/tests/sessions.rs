mod support;

use std::path::PathBuf;

use agora_core::clock::Timestamp;
use agora_core::ids::ImageId;
use agora_core::model::{Category, Collage, Mode, SurveyResponse};
use agora_core::session::{Command, Session, StageOutput};
use proptest::prelude::*;
use serde_json::Value;
use support::sim;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn simulated_logs_pass_the_audit_and_round_trip(seed in any::<u64>()) {
        let (st, clock) = sim::studio(&fixtures());
        let (s, _) = sim::simulate(&st, &clock, seed, 150);
        let doc = s.export().unwrap();
        let audit = sim::audit(&doc);
        prop_assert!(audit.gate_violations.is_empty(), "{:?}", audit.gate_violations);
        prop_assert!(audit.order_violations.is_empty(), "{:?}", audit.order_violations);
        prop_assert_eq!(audit.entries, s.events.len());
        let back = Session::import(&doc).unwrap();
        prop_assert_eq!(back.export().unwrap(), doc);
        prop_assert_eq!(&back, &s);
    }
}

fn img(n: u8) -> ImageId {
    ImageId(format!("{n:064x}"))
}

#[derive(Debug, Clone)]
enum Op {
    Replace(usize, u8),
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn collage_agrees_with_a_plain_model(ops in prop::collection::vec((0usize..12, 0u8..30).prop_map(|(s, i)| Op::Replace(s, i)), 0..60)) {
        let initial: Vec<ImageId> = (0..10).map(img).collect();
        let mut collage = Collage::new(initial.clone()).unwrap();
        let mut model: Vec<ImageId> = initial.clone();
        let mut log: Vec<(usize, ImageId, ImageId)> = Vec::new();
        for (k, Op::Replace(slot, n)) in ops.into_iter().enumerate() {
            let added = img(n);
            let valid = slot < 10 && !model.contains(&added);
            let r = collage.replace(slot, added.clone(), Mode::Diverse, Timestamp(k as i64));
            prop_assert_eq!(r.is_ok(), valid);
            if valid {
                log.push((slot, model[slot].clone(), added.clone()));
                model[slot] = added;
            }
            prop_assert_eq!(collage.slots(), &model[..]);
        }
        prop_assert_eq!(collage.initial_slots(), &initial[..]);
        let got: Vec<_> = collage.replacement_log().iter().map(|r| (r.slot, r.removed.clone(), r.added.clone())).collect();
        prop_assert_eq!(got, log);
        let back: Collage = serde_json::from_str(&serde_json::to_string(&collage).unwrap()).unwrap();
        prop_assert_eq!(back, collage);
    }
}

/// A session stopped right after an accept that came `gap` ms after expand.
fn accepted_after(gap: i64) -> String {
    let (st, clock) = sim::studio(&fixtures());
    let order = vec![Mode::Agonistic, Mode::Diverse, Mode::Reformulative];
    let mut s = st.new_session("gate".into(), sim::PROMPT, Category::History, Some(order), None).unwrap();
    let run = |s: &mut Session, cmd: Command| {
        clock.advance(100);
        st.execute(s, cmd).unwrap();
    };
    for _ in 0..3 {
        run(&mut s, Command::RunStage { mode: Mode::Baseline, prompt: None });
    }
    let first: Vec<ImageId> = s.images.keys().take(10).cloned().collect();
    run(&mut s, Command::InitCollage { images: first });
    run(&mut s, Command::DesignStatement { text: "wigs".into() });
    run(&mut s, Command::Survey { survey: SurveyResponse { stage: Mode::Baseline, satisfaction: 3, rethinking: 3, appropriateness: 3, control: 3, interest: None } });
    run(&mut s, Command::RunStage { mode: Mode::Agonistic, prompt: None });
    let StageOutput::Interpretations { set } = &s.runs.last().unwrap().output else { panic!() };
    let id = set.interpretations[0].id.clone();
    run(&mut s, Command::Expand { interpretation_id: id.clone() });
    clock.advance(gap - 100);
    run(&mut s, Command::Accept { interpretation_id: id });
    s.export().unwrap()
}

fn shift_last_entry(doc: &str, by: i64) -> String {
    let mut lines: Vec<String> = doc.lines().map(str::to_string).collect();
    let last = lines.last_mut().unwrap();
    let mut v: Value = serde_json::from_str(last).unwrap();
    v["at"] = (v["at"].as_i64().unwrap() + by).into();
    *last = serde_json::to_string(&v).unwrap();
    lines.join("\n") + "\n"
}

#[test]
fn replayed_accepts_respect_the_gate() {
    let doc = accepted_after(3000);
    assert_eq!(sim::audit(&doc).accepts, 1);
    let s = Session::import(&doc).unwrap();
    assert!(s.active_workspace().is_some());

    let early = shift_last_entry(&doc, -1);
    assert_ne!(early, doc);
    assert_eq!(Session::import(&early).unwrap_err().code(), "gate-not-elapsed");
    assert_eq!(sim::audit(&early).gate_violations.len(), 1);
    Session::import(&shift_last_entry(&doc, 5000)).unwrap();
}

#[test]
fn live_accept_one_millisecond_early_is_refused() {
    let (st, clock) = sim::studio(&fixtures());
    let doc = accepted_after(3000);
    let mut events = Session::import(&doc).unwrap().events;
    events.pop();
    let mut s2 = Session::replay(events).unwrap();
    let StageOutput::Interpretations { set } = &s2.runs.last().unwrap().output else { panic!() };
    let id = set.interpretations[1].id.clone();
    clock.set(s2.last_at());
    st.execute(&mut s2, Command::Expand { interpretation_id: id.clone() }).unwrap();
    clock.advance(2999);
    let err = st.execute(&mut s2, Command::Accept { interpretation_id: id.clone() }).unwrap_err();
    assert_eq!(err.code(), "gate-not-elapsed");
    clock.advance(1);
    st.execute(&mut s2, Command::Accept { interpretation_id: id }).unwrap();
}

#[test]
fn simulation_reaches_the_interesting_states() {
    let (st, clock) = sim::studio(&fixtures());
    let (mut accepted, mut refused, mut finished, mut agonistic) = (0, 0, 0, 0);
    for seed in 0..40 {
        let (s, out) = sim::simulate(&st, &clock, seed, 250);
        accepted += out.accepted;
        refused += out.gate_rejections;
        finished += usize::from(s.finished);
        agonistic += usize::from(s.runs.iter().any(|r| r.stage == Mode::Agonistic));
    }
    eprintln!("accepted {accepted}, gate refusals {refused}, finished {finished}, agonistic {agonistic}");
    assert!(accepted > 0 && refused > 0 && finished > 0 && agonistic > 0);
}
