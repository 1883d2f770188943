//! Shared domain vocabulary. Pure data; no I/O.
//!
//! Every type here serializes to a single JSON object with snake_case keys.
//! Constructors validate; deserialization goes through the same checks where
//! an invariant spans several fields.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::clock::Timestamp;
use crate::error::{Error, Result};
use crate::ids::{ImageId, Token};

pub const COLLAGE_SIZE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Identity,
    Politics,
    History,
    Custom,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::Identity,
        Category::Politics,
        Category::History,
        Category::Custom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Identity => "identity",
            Category::Politics => "politics",
            Category::History => "history",
            Category::Custom => "custom",
        }
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::invalid(format!("unknown category {s:?}")))
    }
}

/// The four interface paradigms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Baseline,
    Diverse,
    Reformulative,
    Agonistic,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Baseline, Mode::Diverse, Mode::Reformulative, Mode::Agonistic];
    pub const NON_BASELINE: [Mode; 3] = [Mode::Diverse, Mode::Reformulative, Mode::Agonistic];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Baseline => "baseline",
            Mode::Diverse => "diverse",
            Mode::Reformulative => "reformulative",
            Mode::Agonistic => "agonistic",
        }
    }

    /// Stages whose survey carries the extra "interest" statement.
    pub fn collects_interest(self) -> bool {
        matches!(self, Mode::Reformulative | Mode::Agonistic)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::invalid(format!("unknown mode {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PromptRecordRepr")]
pub struct PromptRecord {
    pub text: String,
    pub category: Category,
    pub created_at: Timestamp,
}

#[derive(Deserialize)]
struct PromptRecordRepr {
    text: String,
    category: Category,
    created_at: Timestamp,
}

impl TryFrom<PromptRecordRepr> for PromptRecord {
    type Error = Error;

    fn try_from(r: PromptRecordRepr) -> Result<Self> {
        PromptRecord::new(r.text, r.category, r.created_at)
    }
}

impl PromptRecord {
    pub fn new(text: impl Into<String>, category: Category, created_at: Timestamp) -> Result<Self> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(Error::invalid("prompt text is empty"));
        }
        Ok(PromptRecord {
            text,
            category,
            created_at,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratedImage {
    pub id: ImageId,
    pub prompt_used: String,
    pub mode: Mode,
    pub bytes_ref: ImageId,
    pub created_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Source {
    pub page_title: String,
    pub section_title: String,
    pub url: String,
}

const JUSTIFICATION_PREFIX: &str = "you may assume";

/// Prefix check for the "You may assume <X>, but <Y>" justification form.
pub fn matches_justification_template(text: &str) -> bool {
    let t = text.trim_start();
    t.len() >= JUSTIFICATION_PREFIX.len()
        && t.is_char_boundary(JUSTIFICATION_PREFIX.len())
        && t[..JUSTIFICATION_PREFIX.len()].eq_ignore_ascii_case(JUSTIFICATION_PREFIX)
}

/// A contested visual reading of a prompt, grounded in one wiki section.
///
/// `section_summary` is generated first and kept for grounding and audit;
/// it never leaves the service in a UI-facing payload (see [`InterpretationCard`]).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interpretation {
    pub id: Token,
    pub section_summary: String,
    pub visual_description: String,
    pub source: Source,
    pub justification: String,
    pub thumbnail: GeneratedImage,
}

impl Interpretation {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("section_summary", &self.section_summary),
            ("visual_description", &self.visual_description),
            ("justification", &self.justification),
            ("source.page_title", &self.source.page_title),
            ("source.section_title", &self.source.section_title),
            ("source.url", &self.source.url),
        ];
        for (name, value) in fields {
            if value.trim().is_empty() {
                return Err(Error::InvalidInput(format!("interpretation field {name} is empty")));
            }
        }
        if !matches_justification_template(&self.justification) {
            return Err(Error::InvalidInput(
                "justification does not follow the \"You may assume\" template".into(),
            ));
        }
        Ok(())
    }

    pub fn card(&self) -> InterpretationCard {
        InterpretationCard {
            id: self.id.clone(),
            visual_description: self.visual_description.clone(),
            source: self.source.clone(),
            thumbnail: self.thumbnail.clone(),
        }
    }
}

/// Collapsed card as shown in the interpretation list. The justification is
/// only released by the expand call; the section summary is never released.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterpretationCard {
    pub id: Token,
    pub visual_description: String,
    pub source: Source,
    pub thumbnail: GeneratedImage,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Suggestion {
    pub id: Token,
    pub reformulated_prompt: String,
    pub thumbnail: GeneratedImage,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Replacement {
    pub slot: usize,
    pub removed: ImageId,
    pub added: ImageId,
    pub stage: Mode,
    pub at: Timestamp,
}

/// Ten image slots. After construction the only mutation is replacing the
/// occupant of one slot; every replacement is logged.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CollageRepr")]
pub struct Collage {
    initial_slots: Vec<ImageId>,
    slots: Vec<ImageId>,
    replacement_log: Vec<Replacement>,
}

#[derive(Deserialize)]
struct CollageRepr {
    initial_slots: Vec<ImageId>,
    slots: Vec<ImageId>,
    replacement_log: Vec<Replacement>,
}

impl TryFrom<CollageRepr> for Collage {
    type Error = Error;

    fn try_from(r: CollageRepr) -> Result<Self> {
        let mut c = Collage::new(r.initial_slots)?;
        for rep in r.replacement_log {
            let held = c.slots.get(rep.slot).cloned();
            if held.as_ref() != Some(&rep.removed) {
                return Err(Error::InvalidInput(format!(
                    "replacement log says slot {} held {} but it held {:?}",
                    rep.slot, rep.removed, held
                )));
            }
            c.replace(rep.slot, rep.added, rep.stage, rep.at)?;
        }
        if c.slots != r.slots {
            return Err(Error::InvalidInput("collage slots disagree with replacement log".into()));
        }
        Ok(c)
    }
}

impl Collage {
    pub fn new(images: Vec<ImageId>) -> Result<Self> {
        if images.len() != COLLAGE_SIZE {
            return Err(Error::invalid(format!(
                "a collage needs exactly {COLLAGE_SIZE} images, got {}",
                images.len()
            )));
        }
        let distinct: BTreeSet<_> = images.iter().collect();
        if distinct.len() != images.len() {
            return Err(Error::invalid("collage images must be distinct"));
        }
        Ok(Collage {
            initial_slots: images.clone(),
            slots: images,
            replacement_log: Vec::new(),
        })
    }

    pub fn slots(&self) -> &[ImageId] {
        &self.slots
    }

    pub fn initial_slots(&self) -> &[ImageId] {
        &self.initial_slots
    }

    pub fn replacement_log(&self) -> &[Replacement] {
        &self.replacement_log
    }

    pub fn contains(&self, id: &ImageId) -> bool {
        self.slots.contains(id)
    }

    /// Puts `added` into `slot`. An image already on the board cannot be
    /// placed twice; an image that was replaced earlier may come back.
    pub fn replace(&mut self, slot: usize, added: ImageId, stage: Mode, at: Timestamp) -> Result<&Replacement> {
        if slot >= COLLAGE_SIZE {
            return Err(Error::invalid(format!("slot {slot} is outside 0..{COLLAGE_SIZE}")));
        }
        if self.slots.contains(&added) {
            return Err(Error::invalid(format!("image {added} is already in the collage")));
        }
        let removed = std::mem::replace(&mut self.slots[slot], added.clone());
        self.replacement_log.push(Replacement {
            slot,
            removed,
            added,
            stage,
            at,
        });
        Ok(self.replacement_log.last().expect("just pushed"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignStatement {
    pub stage: Mode,
    pub text: String,
    pub recorded_at: Timestamp,
}

/// Likert responses on a 1-5 scale.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyResponse {
    pub stage: Mode,
    pub satisfaction: u8,
    pub rethinking: u8,
    pub appropriateness: u8,
    pub control: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interest: Option<u8>,
}

impl SurveyResponse {
    /// Ratings must lie in 1..=5. Interest is asked only after the
    /// reformulative and agonistic stages, and is required there.
    pub fn validate(&self) -> Result<()> {
        let ratings = [
            ("satisfaction", Some(self.satisfaction)),
            ("rethinking", Some(self.rethinking)),
            ("appropriateness", Some(self.appropriateness)),
            ("control", Some(self.control)),
            ("interest", self.interest),
        ];
        for (name, r) in ratings {
            if let Some(v) = r {
                if !(1..=5).contains(&v) {
                    return Err(Error::invalid(format!("{name} rating {v} is outside 1-5")));
                }
            }
        }
        match (self.stage.collects_interest(), self.interest) {
            (true, None) => Err(Error::invalid(format!("{} survey requires an interest rating", self.stage))),
            (false, Some(_)) => Err(Error::invalid(format!("{} survey has no interest statement", self.stage))),
            _ => Ok(()),
        }
    }

    pub fn rating(&self, measure: Measure) -> Option<u8> {
        match measure {
            Measure::Satisfaction => Some(self.satisfaction),
            Measure::Rethinking => Some(self.rethinking),
            Measure::Appropriateness => Some(self.appropriateness),
            Measure::Control => Some(self.control),
            Measure::Interest => self.interest,
        }
    }
}

/// Survey statements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Satisfaction,
    Rethinking,
    Appropriateness,
    Control,
    Interest,
}

impl Measure {
    pub const ALL: [Measure; 5] = [
        Measure::Satisfaction,
        Measure::Rethinking,
        Measure::Appropriateness,
        Measure::Control,
        Measure::Interest,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Measure::Satisfaction => "satisfaction",
            Measure::Rethinking => "rethinking",
            Measure::Appropriateness => "appropriateness",
            Measure::Control => "control",
            Measure::Interest => "interest",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankingDimension {
    Rethinking,
    Appropriateness,
    Control,
}

impl RankingDimension {
    pub const ALL: [RankingDimension; 3] = [
        RankingDimension::Rethinking,
        RankingDimension::Appropriateness,
        RankingDimension::Control,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RankingDimension::Rethinking => "rethinking",
            RankingDimension::Appropriateness => "appropriateness",
            RankingDimension::Control => "control",
        }
    }
}

/// End-of-session ranking; 1 is the top rank and ties are allowed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankingRecord {
    pub dimension: RankingDimension,
    pub ranks: BTreeMap<Mode, u32>,
}

impl RankingRecord {
    pub fn validate(&self) -> Result<()> {
        for mode in Mode::ALL {
            match self.ranks.get(&mode) {
                None => return Err(Error::invalid(format!("ranking is missing {mode}"))),
                Some(0) => return Err(Error::invalid(format!("rank for {mode} must be positive"))),
                Some(_) => {}
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntentCode {
    Direct,
    Reminder,
    Expansion,
    Challenge,
}

impl IntentCode {
    pub const ALL: [IntentCode; 4] = [
        IntentCode::Direct,
        IntentCode::Reminder,
        IntentCode::Expansion,
        IntentCode::Challenge,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            IntentCode::Direct => "direct",
            IntentCode::Reminder => "reminder",
            IntentCode::Expansion => "expansion",
            IntentCode::Challenge => "challenge",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueCode {
    Realism,
    Familiarity,
    Diversity,
    Aesthetics,
}

impl ValueCode {
    pub const ALL: [ValueCode; 4] = [
        ValueCode::Realism,
        ValueCode::Familiarity,
        ValueCode::Diversity,
        ValueCode::Aesthetics,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ValueCode::Realism => "realism",
            ValueCode::Familiarity => "familiarity",
            ValueCode::Diversity => "diversity",
            ValueCode::Aesthetics => "aesthetics",
        }
    }
}

/// One image added to a collage, as coded by one rater.
///
/// `session` is only needed when the same image id was added in more than
/// one session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CodedImageEventRepr")]
pub struct CodedImageEvent {
    pub image: ImageId,
    pub intent: IntentCode,
    pub values: BTreeSet<ValueCode>,
    pub rater: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session: Option<String>,
}

#[derive(Deserialize)]
struct CodedImageEventRepr {
    image: ImageId,
    intent: IntentCode,
    values: BTreeSet<ValueCode>,
    rater: String,
    #[serde(default)]
    session: Option<String>,
}

impl TryFrom<CodedImageEventRepr> for CodedImageEvent {
    type Error = Error;

    fn try_from(r: CodedImageEventRepr) -> Result<Self> {
        let ev = CodedImageEvent {
            image: r.image,
            intent: r.intent,
            values: r.values,
            rater: r.rater,
            session: r.session,
        };
        ev.validate()?;
        Ok(ev)
    }
}

impl CodedImageEvent {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidInput(format!("coded event for {} has no value codes", self.image)));
        }
        if self.rater.trim().is_empty() {
            return Err(Error::InvalidInput(format!("coded event for {} has no rater", self.image)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jsonl;
    use proptest::prelude::*;

    fn img(n: usize) -> ImageId {
        ImageId(format!("{n:064x}"))
    }

    fn ten() -> Vec<ImageId> {
        (0..10).map(img).collect()
    }

    fn sample_image() -> GeneratedImage {
        GeneratedImage {
            id: img(1),
            prompt_used: "a person".into(),
            mode: Mode::Baseline,
            bytes_ref: img(1),
            created_at: Timestamp(5),
        }
    }

    #[test]
    fn prompt_rejects_blank_text() {
        assert!(PromptRecord::new("   ", Category::Custom, Timestamp(0)).is_err());
        let err = jsonl::decode::<PromptRecord>(r#"{"text":" ","category":"history","created_at":1}"#);
        assert!(err.is_err());
        assert!(jsonl::decode::<PromptRecord>(r#"{"text":"x","category":"sports","created_at":1}"#).is_err());
    }

    #[test]
    fn justification_prefix_is_case_insensitive() {
        assert!(matches_justification_template("You may assume X, but Y"));
        assert!(matches_justification_template("  you MAY assume anything"));
        assert!(!matches_justification_template("Assume X, but Y"));
        assert!(!matches_justification_template("You may"));
    }

    #[test]
    fn interpretation_requires_all_fields() {
        let mut i = Interpretation {
            id: Token::derived(["i"]),
            section_summary: "summary".into(),
            visual_description: "desc".into(),
            source: Source {
                page_title: "P".into(),
                section_title: "S".into(),
                url: "https://example.org/wiki/P#S".into(),
            },
            justification: "You may assume a, but b".into(),
            thumbnail: sample_image(),
        };
        i.validate().unwrap();
        i.section_summary = " ".into();
        assert!(i.validate().is_err());
    }

    #[test]
    fn card_payload_has_no_summary() {
        let i = Interpretation {
            id: Token::derived(["i"]),
            section_summary: "SECRET-SUMMARY".into(),
            visual_description: "desc".into(),
            source: Source {
                page_title: "P".into(),
                section_title: "S".into(),
                url: "u".into(),
            },
            justification: "You may assume a, but b".into(),
            thumbnail: sample_image(),
        };
        let json = serde_json::to_string(&i.card()).unwrap();
        assert!(!json.contains("section_summary"));
        assert!(!json.contains("SECRET-SUMMARY"));
    }

    #[test]
    fn collage_needs_exactly_ten_distinct() {
        assert!(Collage::new(ten()[..9].to_vec()).is_err());
        let mut dup = ten();
        dup[9] = img(0);
        assert!(Collage::new(dup).is_err());
        assert!(Collage::new(ten()).is_ok());
    }

    #[test]
    fn collage_replace_logs_and_keeps_size() {
        let mut c = Collage::new(ten()).unwrap();
        c.replace(3, img(42), Mode::Diverse, Timestamp(9)).unwrap();
        assert_eq!(c.slots().len(), 10);
        assert_eq!(c.replacement_log().len(), 1);
        assert_eq!(c.replacement_log()[0].removed, img(3));
        assert!(c.replace(10, img(43), Mode::Diverse, Timestamp(9)).is_err());
        assert!(c.replace(4, img(42), Mode::Diverse, Timestamp(9)).is_err());
        // removed images may come back
        c.replace(5, img(3), Mode::Diverse, Timestamp(10)).unwrap();
        assert!(c.contains(&img(3)));
    }

    #[test]
    fn collage_decode_checks_log_consistency() {
        let mut c = Collage::new(ten()).unwrap();
        c.replace(0, img(50), Mode::Agonistic, Timestamp(1)).unwrap();
        let line = jsonl::encode(&c).unwrap();
        assert_eq!(jsonl::decode::<Collage>(&line).unwrap(), c);
        let mut forged: serde_json::Value = serde_json::from_str(&line).unwrap();
        forged["replacement_log"][0]["removed"] = serde_json::json!(img(7).0);
        assert!(serde_json::from_value::<Collage>(forged).is_err());
    }

    #[test]
    fn survey_rules() {
        let mut s = SurveyResponse {
            stage: Mode::Baseline,
            satisfaction: 3,
            rethinking: 2,
            appropriateness: 4,
            control: 5,
            interest: None,
        };
        s.validate().unwrap();
        s.control = 6;
        assert!(s.validate().is_err());
        s.control = 5;
        s.interest = Some(3);
        assert!(s.validate().is_err());
        s.stage = Mode::Agonistic;
        s.validate().unwrap();
        s.interest = None;
        assert!(s.validate().is_err());
    }

    #[test]
    fn ranking_needs_all_modes_positive() {
        let mut r = RankingRecord {
            dimension: RankingDimension::Control,
            ranks: Mode::ALL.into_iter().map(|m| (m, 1)).collect(),
        };
        r.validate().unwrap();
        r.ranks.insert(Mode::Diverse, 0);
        assert!(r.validate().is_err());
        r.ranks.remove(&Mode::Diverse);
        assert!(r.validate().is_err());
    }

    #[test]
    fn coded_event_needs_values() {
        let line = format!(r#"{{"image":"{}","intent":"direct","values":[],"rater":"a"}}"#, img(1));
        assert!(jsonl::decode::<CodedImageEvent>(&line).is_err());
        let line = format!(
            r#"{{"image":"{}","intent":"challenge","values":["diversity","realism"],"rater":"a"}}"#,
            img(1)
        );
        let ev = jsonl::decode::<CodedImageEvent>(&line).unwrap();
        assert_eq!(ev.values.len(), 2);
    }

    #[test]
    fn enum_round_trips() {
        for m in Mode::ALL {
            assert_eq!(m.as_str().parse::<Mode>().unwrap(), m);
            assert_eq!(jsonl::decode::<Mode>(&jsonl::encode(&m).unwrap()).unwrap(), m);
        }
        let r = RankingRecord {
            dimension: RankingDimension::Rethinking,
            ranks: [(Mode::Baseline, 4), (Mode::Diverse, 3), (Mode::Reformulative, 2), (Mode::Agonistic, 1)]
                .into_iter()
                .collect(),
        };
        let line = jsonl::encode(&r).unwrap();
        assert!(line.contains(r#""agonistic":1"#));
        assert_eq!(jsonl::decode::<RankingRecord>(&line).unwrap(), r);
    }

    proptest! {
        #[test]
        fn collage_stays_ten(ops in proptest::collection::vec((0usize..12, 0usize..40), 0..80)) {
            let mut c = Collage::new(ten()).unwrap();
            for (i, (slot, image)) in ops.into_iter().enumerate() {
                let _ = c.replace(slot, img(image), Mode::Reformulative, Timestamp(i as i64));
                prop_assert_eq!(c.slots().len(), COLLAGE_SIZE);
            }
            let back: Collage = jsonl::decode(&jsonl::encode(&c).unwrap()).unwrap();
            prop_assert_eq!(back, c);
        }

        #[test]
        fn survey_round_trip(stage in 0usize..4, r in proptest::array::uniform5(1u8..=5)) {
            let stage = Mode::ALL[stage];
            let s = SurveyResponse {
                stage,
                satisfaction: r[0],
                rethinking: r[1],
                appropriateness: r[2],
                control: r[3],
                interest: stage.collects_interest().then_some(r[4]),
            };
            s.validate().unwrap();
            let back: SurveyResponse = jsonl::decode(&jsonl::encode(&s).unwrap()).unwrap();
            prop_assert_eq!(back, s);
        }
    }
}
