//! Praise for the player's drawing and play session.
//!
//! Templates are grouped by gameplay status and, once played, by whether the
//! level counts as hard. Placeholders:
//!
//! * `{label}`: recognized object name.
//! * `{a}`: `a` or `an` to suit the label.
//! * `{birds}`: birds used, with noun, e.g. `1 bird` or `3 birds`. Templates
//!   using it are skipped when the outcome has no bird count.
//!
//! Every template starts with an entry of the praise lexicon, and no output
//! may contain a word of the negative lexicon.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prng::SplitMix64;
use crate::stability::DifficultyStats;

const BUILTIN_TEMPLATES: &str = include_str!("../data/therapy/templates.json");
const BUILTIN_PRAISE: &str = include_str!("../data/therapy/praise.txt");
const BUILTIN_NEGATIVE: &str = include_str!("../data/therapy/negative.txt");

/// How the play session went.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeStatus {
    /// Player cleared the level.
    Cleared,
    /// Player ran out of birds.
    Failed,
    /// Level not played yet.
    NotPlayed,
}

/// Gameplay data fed into feedback.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameplayOutcome {
    /// Status.
    pub status: OutcomeStatus,
    /// Birds fired; absent iff not played.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub birds_used: Option<u32>,
}

impl GameplayOutcome {
    /// A level nobody has played.
    pub const NOT_PLAYED: Self = Self {
        status: OutcomeStatus::NotPlayed,
        birds_used: None,
    };

    /// True when `birds_used` is present exactly for played levels.
    pub fn is_valid(&self) -> bool {
        (self.status == OutcomeStatus::NotPlayed) == self.birds_used.is_none()
    }
}

/// One generated sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackPhrase {
    /// The sentence.
    pub text: String,
    /// Praise opener as it appears in `text`.
    pub praise_token: String,
    /// Object name as it appears in `text`.
    pub label_used: String,
}

/// Template group a phrase is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bucket {
    /// Cleared, normal difficulty.
    ClearedNormal,
    /// Cleared, hard.
    ClearedHard,
    /// Failed, normal difficulty.
    FailedNormal,
    /// Failed, hard.
    FailedHard,
    /// Not played, any difficulty.
    NotPlayed,
}

impl Bucket {
    /// All buckets.
    pub const ALL: [Bucket; 5] = [
        Bucket::ClearedNormal,
        Bucket::ClearedHard,
        Bucket::FailedNormal,
        Bucket::FailedHard,
        Bucket::NotPlayed,
    ];

    /// Bucket for a status and difficulty band.
    pub fn select(status: OutcomeStatus, hard: bool) -> Self {
        match (status, hard) {
            (OutcomeStatus::Cleared, false) => Bucket::ClearedNormal,
            (OutcomeStatus::Cleared, true) => Bucket::ClearedHard,
            (OutcomeStatus::Failed, false) => Bucket::FailedNormal,
            (OutcomeStatus::Failed, true) => Bucket::FailedHard,
            (OutcomeStatus::NotPlayed, _) => Bucket::NotPlayed,
        }
    }
}

/// Templates per bucket, as stored in `templates.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateBuckets {
    /// Cleared, normal.
    pub cleared_normal: Vec<String>,
    /// Cleared, hard.
    pub cleared_hard: Vec<String>,
    /// Failed, normal.
    pub failed_normal: Vec<String>,
    /// Failed, hard.
    pub failed_hard: Vec<String>,
    /// Not played.
    pub not_played: Vec<String>,
}

impl TemplateBuckets {
    /// Templates of one bucket.
    pub fn get(&self, bucket: Bucket) -> &[String] {
        match bucket {
            Bucket::ClearedNormal => &self.cleared_normal,
            Bucket::ClearedHard => &self.cleared_hard,
            Bucket::FailedNormal => &self.failed_normal,
            Bucket::FailedHard => &self.failed_hard,
            Bucket::NotPlayed => &self.not_played,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct TemplateFile {
    hard_cutoff: u64,
    templates: TemplateBuckets,
}

/// Problems loading therapy data.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TherapyError {
    /// templates.json did not parse.
    #[error("template file: {0}")]
    Format(String),
    /// A template or lexicon breaks an invariant.
    #[error("{0}")]
    Invalid(String),
}

/// Remembers the last template a session saw so it is not repeated back to
/// back. Owned by the caller, one per player session.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackSession {
    last: Option<(Bucket, usize)>,
}

/// Templates plus the praise and negative lexicons.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TherapyBank {
    templates: TemplateBuckets,
    praise: Vec<Vec<String>>,
    negative: Vec<String>,
    hard_cutoff: u64,
}

/// Parses a one-entry-per-line word list. `#` starts a comment line.
pub fn parse_word_list(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

/// Lowercased words with their byte spans in `text`.
fn words(text: &str) -> Vec<(String, usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices().chain(core::iter::once((text.len(), ' '))) {
        let is_word = c.is_alphanumeric() || c == '\'';
        match (start, is_word) {
            (None, true) => start = Some(i),
            (Some(s), false) => {
                out.push((text[s..i].to_lowercase(), s, i));
                start = None;
            }
            _ => {}
        }
    }
    out
}

fn phrase_at(text_words: &[(String, usize, usize)], at: usize, phrase: &[String]) -> bool {
    phrase.len() <= text_words.len() - at
        && phrase
            .iter()
            .zip(&text_words[at..])
            .all(|(p, (w, _, _))| p == w)
}

fn article_for(label: &str) -> &'static str {
    match label.chars().next().map(|c| c.to_ascii_lowercase()) {
        Some('a' | 'e' | 'i' | 'o' | 'u') => "an",
        _ => "a",
    }
}

fn birds_text(n: u32) -> String {
    if n == 1 {
        "1 bird".to_string()
    } else {
        alloc::format!("{n} birds")
    }
}

/// Fills placeholders in `template`.
pub fn render(template: &str, label: &str, birds_used: Option<u32>) -> String {
    let mut text = template
        .replace("{label}", label)
        .replace("{a}", article_for(label));
    if let Some(n) = birds_used {
        text = text.replace("{birds}", &birds_text(n));
    }
    text
}

impl TherapyBank {
    /// The bank shipped with the crate.
    pub fn builtin() -> Self {
        Self::from_sources(BUILTIN_TEMPLATES, BUILTIN_PRAISE, BUILTIN_NEGATIVE)
            .expect("shipped therapy data is valid")
    }

    /// Loads a bank from the JSON template file and the two word lists.
    pub fn from_sources(templates_json: &str, praise: &str, negative: &str) -> Result<Self, TherapyError> {
        let file: TemplateFile =
            serde_json::from_str(templates_json).map_err(|e| TherapyError::Format(e.to_string()))?;
        let bank = Self {
            templates: file.templates,
            praise: parse_word_list(praise)
                .iter()
                .map(|p| p.split_whitespace().map(str::to_string).collect())
                .collect(),
            negative: parse_word_list(negative),
            hard_cutoff: file.hard_cutoff,
        };
        bank.validate()?;
        Ok(bank)
    }

    /// Same bank with another hard/normal cutoff.
    pub fn with_hard_cutoff(mut self, cutoff: u64) -> Self {
        self.hard_cutoff = cutoff;
        self
    }

    /// Difficulty score at or above which a level counts as hard.
    pub fn hard_cutoff(&self) -> u64 {
        self.hard_cutoff
    }

    /// Template groups.
    pub fn templates(&self) -> &TemplateBuckets {
        &self.templates
    }

    fn validate(&self) -> Result<(), TherapyError> {
        if self.praise.iter().any(Vec::is_empty) || self.praise.is_empty() {
            return Err(TherapyError::Invalid("praise lexicon is empty".into()));
        }
        for bucket in Bucket::ALL {
            let list = self.templates.get(bucket);
            let plain = list.iter().filter(|t| !t.contains("{birds}")).count();
            if plain < 2 {
                return Err(TherapyError::Invalid(alloc::format!(
                    "{bucket:?} needs at least two templates without {{birds}}"
                )));
            }
            for t in list {
                if !t.contains("{label}") {
                    return Err(TherapyError::Invalid(alloc::format!("template {t:?} lacks {{label}}")));
                }
                if bucket == Bucket::NotPlayed && t.contains("{birds}") {
                    return Err(TherapyError::Invalid(alloc::format!(
                        "not-played template {t:?} cannot use {{birds}}"
                    )));
                }
                let stripped = t.replace("{label}", "").replace("{a}", "").replace("{birds}", "");
                if stripped.contains('{') || stripped.contains('}') {
                    return Err(TherapyError::Invalid(alloc::format!("template {t:?} has an unknown placeholder")));
                }
                if self.opener(t).is_none() {
                    return Err(TherapyError::Invalid(alloc::format!(
                        "template {t:?} does not open with praise"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Praise entry at the very start of `text`, longest first, sliced from
    /// `text` as written.
    fn opener<'t>(&self, text: &'t str) -> Option<&'t str> {
        let ws = words(text);
        if ws.first().map(|w| w.1) != text.find(|c: char| !c.is_whitespace()) {
            return None;
        }
        self.praise
            .iter()
            .filter(|p| phrase_at(&ws, 0, p))
            .max_by_key(|p| p.len())
            .map(|p| &text[ws[0].1..ws[p.len() - 1].2])
    }

    /// True iff `text` holds at least one praise entry and no negative word.
    pub fn lexicon_check(&self, text: &str) -> bool {
        let ws = words(text);
        let has_praise = (0..ws.len()).any(|i| self.praise.iter().any(|p| phrase_at(&ws, i, p)));
        let has_negative = ws.iter().any(|(w, _, _)| self.negative.contains(w));
        has_praise && !has_negative
    }

    fn candidates(&self, bucket: Bucket, birds_used: Option<u32>) -> Vec<usize> {
        self.templates
            .get(bucket)
            .iter()
            .enumerate()
            .filter(|(_, t)| birds_used.is_some() || !t.contains("{birds}"))
            .map(|(i, _)| i)
            .collect()
    }

    fn bucket_for(&self, outcome: &GameplayOutcome, stats: &DifficultyStats) -> Bucket {
        Bucket::select(outcome.status, stats.difficulty_score >= self.hard_cutoff)
    }

    fn phrase(&self, bucket: Bucket, index: usize, label: &str, outcome: &GameplayOutcome) -> FeedbackPhrase {
        let birds = match outcome.status {
            OutcomeStatus::NotPlayed => None,
            _ => outcome.birds_used,
        };
        let text = render(&self.templates.get(bucket)[index], label, birds);
        let praise_token = self
            .opener(&text)
            .unwrap_or_else(|| text.split(|c: char| !c.is_alphanumeric()).next().unwrap_or(""))
            .to_string();
        FeedbackPhrase {
            text,
            praise_token,
            label_used: label.to_string(),
        }
    }

    /// Picks a template for `(status, band)` with `seed` and fills it in.
    pub fn compose(
        &self,
        label: &str,
        outcome: &GameplayOutcome,
        stats: &DifficultyStats,
        seed: u64,
    ) -> FeedbackPhrase {
        let bucket = self.bucket_for(outcome, stats);
        let options = self.candidates(bucket, birds_for(outcome));
        let pick = options[SplitMix64::new(seed).next_index(options.len())];
        self.phrase(bucket, pick, label, outcome)
    }

    /// Like [`compose`](Self::compose), but steps past the template the
    /// session saw last.
    pub fn compose_in_session(
        &self,
        session: &mut FeedbackSession,
        label: &str,
        outcome: &GameplayOutcome,
        stats: &DifficultyStats,
        seed: u64,
    ) -> FeedbackPhrase {
        let bucket = self.bucket_for(outcome, stats);
        let options = self.candidates(bucket, birds_for(outcome));
        let mut slot = SplitMix64::new(seed).next_index(options.len());
        if session.last == Some((bucket, options[slot])) && options.len() > 1 {
            slot = (slot + 1) % options.len();
        }
        session.last = Some((bucket, options[slot]));
        self.phrase(bucket, options[slot], label, outcome)
    }
}

fn birds_for(outcome: &GameplayOutcome) -> Option<u32> {
    match outcome.status {
        OutcomeStatus::NotPlayed => None,
        _ => outcome.birds_used,
    }
}

/// [`TherapyBank::compose`] on the shipped bank.
pub fn compose_feedback(
    top_label: &str,
    outcome: &GameplayOutcome,
    stats: &DifficultyStats,
    seed: u64,
) -> FeedbackPhrase {
    TherapyBank::builtin().compose(top_label, outcome, stats, seed)
}

/// [`TherapyBank::lexicon_check`] on the shipped lexicons.
pub fn lexicon_check(text: &str) -> bool {
    TherapyBank::builtin().lexicon_check(text)
}
