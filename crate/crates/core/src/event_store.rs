//! Temporal event-sequence corpora: loading, filtering and summary counts.
//!
//! A corpus is a vocabulary of entities plus a list of sequences, each an
//! ordered run of `(entity, time)` events observed on `[0, horizon]`.
//!
//! # Formats
//!
//! JSONL, one object per line:
//!
//! ```text
//! {"horizon": 10.0}                      optional file header, applies to every sequence
//! {"entities": ["a", "b"]}               optional vocabulary header, fixes id order
//! {"seq": "s2", "horizon": 4.0}          optional per-sequence horizon
//! {"seq": "s1", "entity": "a", "t": 0.5}
//! ```
//!
//! CSV with a required `seq,entity,t` header row.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

/// Dense entity index in `0..U`.
pub type EntityId = usize;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("malformed record at line {line}: {detail}")]
    Malformed { line: usize, detail: String },

    #[error("negative timestamp at line {line}")]
    NegativeTimestamp { line: usize },

    #[error("empty corpus")]
    Empty,

    #[error("sequence {seq:?} has no positive horizon")]
    ZeroHorizon { seq: String },

    #[error("event at time {time} exceeds horizon {horizon} in sequence {seq:?}")]
    BeyondHorizon { seq: String, time: f64, horizon: f64 },

    #[error("unknown entity id {0}")]
    UnknownEntity(EntityId),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CorpusError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Jsonl,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "json" => Ok(Format::Jsonl),
            "csv" => Ok(Format::Csv),
            other => Err(CorpusError::InvalidArgument(format!("unknown format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub id: EntityId,
    pub name: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub entity: EntityId,
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSequence {
    pub id: String,
    /// Non-decreasing in time; equal timestamps keep their input order.
    pub events: Vec<Event>,
    pub horizon: f64,
}

impl EventSequence {
    pub fn new(id: impl Into<String>, mut events: Vec<Event>, horizon: f64) -> Self {
        events.sort_by(|a, b| a.time.total_cmp(&b.time));
        Self {
            id: id.into(),
            events,
            horizon,
        }
    }

    pub fn max_time(&self) -> f64 {
        self.events.last().map_or(0.0, |e| e.time)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub entities: Vec<Entity>,
    pub sequences: Vec<EventSequence>,
}

impl Corpus {
    /// Builds a corpus from parts, checking ids and horizons.
    pub fn new(names: Vec<String>, sequences: Vec<EventSequence>) -> Result<Self> {
        let entities: Vec<Entity> = names
            .into_iter()
            .enumerate()
            .map(|(id, name)| Entity { id, name })
            .collect();
        let corpus = Self {
            entities,
            sequences,
        };
        corpus.validate()?;
        Ok(corpus)
    }

    pub fn validate(&self) -> Result<()> {
        let u = self.entities.len();
        for (i, e) in self.entities.iter().enumerate() {
            if e.id != i {
                return Err(CorpusError::InvalidArgument(format!(
                    "entity ids must be dense, found {} at position {i}",
                    e.id
                )));
            }
        }
        for seq in &self.sequences {
            if !(seq.horizon > 0.0) {
                return Err(CorpusError::ZeroHorizon { seq: seq.id.clone() });
            }
            let mut prev = f64::NEG_INFINITY;
            for ev in &seq.events {
                if ev.entity >= u {
                    return Err(CorpusError::UnknownEntity(ev.entity));
                }
                if ev.time < prev {
                    return Err(CorpusError::InvalidArgument(format!(
                        "sequence {:?} is not sorted by time",
                        seq.id
                    )));
                }
                if ev.time > seq.horizon {
                    return Err(CorpusError::BeyondHorizon {
                        seq: seq.id.clone(),
                        time: ev.time,
                        horizon: seq.horizon,
                    });
                }
                prev = ev.time;
            }
        }
        Ok(())
    }

    pub fn num_entities(&self) -> usize {
        self.entities.len()
    }

    pub fn num_sequences(&self) -> usize {
        self.sequences.len()
    }

    pub fn num_events(&self) -> usize {
        self.sequences.iter().map(|s| s.events.len()).sum()
    }

    pub fn names(&self) -> Vec<String> {
        self.entities.iter().map(|e| e.name.clone()).collect()
    }

    pub fn entity_id(&self, name: &str) -> Option<EntityId> {
        self.entities.iter().position(|e| e.name == name)
    }

    pub fn max_horizon(&self) -> f64 {
        self.sequences
            .iter()
            .map(|s| s.horizon)
            .fold(0.0, f64::max)
    }

    /// Total number of events per entity.
    pub fn event_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.entities.len()];
        for seq in &self.sequences {
            for ev in &seq.events {
                counts[ev.entity] += 1;
            }
        }
        counts
    }

    /// Median gap between consecutive events within a sequence, if any exist.
    pub fn median_inter_event_gap(&self) -> Option<f64> {
        let mut gaps: Vec<f64> = self
            .sequences
            .iter()
            .flat_map(|s| s.events.windows(2).map(|w| w[1].time - w[0].time))
            .filter(|g| *g > 0.0)
            .collect();
        if gaps.is_empty() {
            return None;
        }
        gaps.sort_by(f64::total_cmp);
        let mid = gaps.len() / 2;
        Some(if gaps.len() % 2 == 0 {
            0.5 * (gaps[mid - 1] + gaps[mid])
        } else {
            gaps[mid]
        })
    }

    /// Writes the corpus as JSONL. Headers are emitted only where the
    /// default rules would not reproduce the stored vocabulary or horizons.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        let names = self.names();
        if first_appearance_order(self) != names {
            writeln!(out, "{}", serde_json::json!({ "entities": names }))?;
        }
        for seq in &self.sequences {
            if seq.events.is_empty() || seq.horizon != seq.max_time() {
                writeln!(
                    out,
                    "{}",
                    serde_json::json!({ "seq": seq.id, "horizon": seq.horizon })
                )?;
            }
            for ev in &seq.events {
                writeln!(
                    out,
                    "{}",
                    serde_json::json!({
                        "seq": seq.id,
                        "entity": self.entities[ev.entity].name,
                        "t": ev.time,
                    })
                )?;
            }
        }
        Ok(())
    }

    pub fn to_jsonl_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }
}

fn first_appearance_order(corpus: &Corpus) -> Vec<String> {
    let mut seen = vec![false; corpus.entities.len()];
    let mut order = Vec::new();
    for seq in &corpus.sequences {
        for ev in &seq.events {
            if !seen[ev.entity] {
                seen[ev.entity] = true;
                order.push(corpus.entities[ev.entity].name.clone());
            }
        }
    }
    order
}

/// Accumulates records in input order and assigns dense ids.
#[derive(Default)]
struct CorpusBuilder {
    names: Vec<String>,
    ids: HashMap<String, EntityId>,
    seq_order: Vec<String>,
    seq_events: HashMap<String, Vec<Event>>,
    seq_horizon: HashMap<String, f64>,
    file_horizon: Option<f64>,
}

impl CorpusBuilder {
    fn entity(&mut self, name: &str) -> EntityId {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = self.names.len();
        self.names.push(name.to_string());
        self.ids.insert(name.to_string(), id);
        id
    }

    fn touch_seq(&mut self, seq: &str) -> &mut Vec<Event> {
        if !self.seq_events.contains_key(seq) {
            self.seq_order.push(seq.to_string());
        }
        self.seq_events.entry(seq.to_string()).or_default()
    }

    fn event(&mut self, line: usize, seq: &str, entity: &str, t: f64) -> Result<()> {
        if !t.is_finite() {
            return Err(CorpusError::Malformed {
                line,
                detail: "timestamp is not finite".into(),
            });
        }
        if t < 0.0 {
            return Err(CorpusError::NegativeTimestamp { line });
        }
        let entity = self.entity(entity);
        self.touch_seq(seq).push(Event { entity, time: t });
        Ok(())
    }

    fn finish(mut self) -> Result<Corpus> {
        if self.seq_order.is_empty() {
            return Err(CorpusError::Empty);
        }
        let mut sequences = Vec::with_capacity(self.seq_order.len());
        for id in &self.seq_order {
            let events = self.seq_events.remove(id).unwrap_or_default();
            let mut seq = EventSequence::new(id.clone(), events, 0.0);
            seq.horizon = self
                .seq_horizon
                .get(id)
                .copied()
                .or(self.file_horizon)
                .unwrap_or_else(|| seq.max_time());
            sequences.push(seq);
        }
        Corpus::new(self.names, sequences)
    }
}

/// Parses a corpus from a byte stream. Entity ids follow first appearance
/// unless a vocabulary header fixes them.
pub fn parse_corpus<R: BufRead>(source: R, format: Format) -> Result<Corpus> {
    match format {
        Format::Jsonl => parse_jsonl(source),
        Format::Csv => parse_csv(source),
    }
}

pub fn parse_corpus_str(source: &str, format: Format) -> Result<Corpus> {
    parse_corpus(source.as_bytes(), format)
}

fn parse_jsonl<R: BufRead>(source: R) -> Result<Corpus> {
    let mut b = CorpusBuilder::default();
    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let malformed = |detail: String| CorpusError::Malformed {
            line: line_no,
            detail,
        };
        let value: Value = serde_json::from_str(trimmed).map_err(|e| malformed(e.to_string()))?;
        let obj = value
            .as_object()
            .ok_or_else(|| malformed("expected a JSON object".into()))?;

        if let Some(list) = obj.get("entities") {
            let list = list
                .as_array()
                .ok_or_else(|| malformed("`entities` must be an array".into()))?;
            for name in list {
                let name = name
                    .as_str()
                    .ok_or_else(|| malformed("entity names must be strings".into()))?;
                b.entity(name);
            }
        }

        if obj.contains_key("entity") || obj.contains_key("t") {
            let seq = obj
                .get("seq")
                .and_then(Value::as_str)
                .ok_or_else(|| malformed("missing string key `seq`".into()))?;
            let entity = obj
                .get("entity")
                .and_then(Value::as_str)
                .ok_or_else(|| malformed("missing string key `entity`".into()))?;
            let t = obj
                .get("t")
                .and_then(Value::as_f64)
                .ok_or_else(|| malformed("missing numeric key `t`".into()))?;
            b.event(line_no, seq, entity, t)?;
        } else if let Some(h) = obj.get("horizon") {
            let h = h
                .as_f64()
                .filter(|h| h.is_finite() && *h > 0.0)
                .ok_or_else(|| malformed("`horizon` must be a positive number".into()))?;
            match obj.get("seq") {
                Some(seq) => {
                    let seq = seq
                        .as_str()
                        .ok_or_else(|| malformed("`seq` must be a string".into()))?
                        .to_string();
                    b.touch_seq(&seq);
                    b.seq_horizon.insert(seq, h);
                }
                None => b.file_horizon = Some(h),
            }
        } else if !obj.contains_key("entities") {
            return Err(malformed("expected an event or a header object".into()));
        }
    }
    b.finish()
}

fn parse_csv<R: BufRead>(source: R) -> Result<Corpus> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = reader
        .headers()
        .map_err(|e| CorpusError::Malformed {
            line: 1,
            detail: e.to_string(),
        })?
        .clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CorpusError::Malformed {
                line: 1,
                detail: format!("missing column `{name}`"),
            })
    };
    let (seq_col, ent_col, t_col) = (col("seq")?, col("entity")?, col("t")?);

    let mut b = CorpusBuilder::default();
    for record in reader.records() {
        let record = record.map_err(|e| CorpusError::Malformed {
            line: e.position().map_or(0, |p| p.line() as usize),
            detail: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| {
            record.get(i).ok_or_else(|| CorpusError::Malformed {
                line,
                detail: "missing field".into(),
            })
        };
        let t: f64 = field(t_col)?
            .parse()
            .map_err(|e: std::num::ParseFloatError| CorpusError::Malformed {
                line,
                detail: e.to_string(),
            })?;
        b.event(line, field(seq_col)?, field(ent_col)?, t)?;
    }
    b.finish()
}

/// Keeps the `k` most frequent entities (ties broken by smaller id) and
/// reindexes them densely in their original relative order. Sequences left
/// without events are dropped.
pub fn filter_top_entities(corpus: &Corpus, k: usize) -> Result<Corpus> {
    if k == 0 {
        return Err(CorpusError::InvalidArgument("k must be at least 1".into()));
    }
    let u = corpus.num_entities();
    if k > u {
        log::warn!("filter_top_entities: k = {k} exceeds {u} entities, keeping all");
    }
    let counts = corpus.event_counts();
    let mut ranked: Vec<EntityId> = (0..u).collect();
    ranked.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    let mut keep = vec![false; u];
    for &id in ranked.iter().take(k) {
        keep[id] = true;
    }

    let mut remap = vec![None; u];
    let mut names = Vec::new();
    for id in 0..u {
        if keep[id] {
            remap[id] = Some(names.len());
            names.push(corpus.entities[id].name.clone());
        }
    }
    let sequences = corpus
        .sequences
        .iter()
        .filter_map(|seq| {
            let events: Vec<Event> = seq
                .events
                .iter()
                .filter_map(|ev| {
                    remap[ev.entity].map(|entity| Event {
                        entity,
                        time: ev.time,
                    })
                })
                .collect();
            (!events.is_empty()).then(|| EventSequence {
                id: seq.id.clone(),
                events,
                horizon: seq.horizon,
            })
        })
        .collect();
    Corpus::new(names, sequences)
}

/// Symmetric table of how often two distinct entities occur close in time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CooccurrenceMatrix {
    pub counts: Vec<Vec<u64>>,
    pub window: f64,
}

impl CooccurrenceMatrix {
    pub fn get(&self, u: EntityId, v: EntityId) -> u64 {
        self.counts[u][v]
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// Counts, for every pair of distinct entities, the unordered event pairs in
/// the same sequence whose time gap is at most `window`.
pub fn cooccurrence_counts(corpus: &Corpus, window: f64) -> Result<CooccurrenceMatrix> {
    if !(window >= 0.0) || !window.is_finite() {
        return Err(CorpusError::InvalidArgument(format!(
            "co-occurrence window must be a non-negative finite number, got {window}"
        )));
    }
    let u = corpus.num_entities();
    let mut counts = vec![vec![0u64; u]; u];
    for seq in &corpus.sequences {
        let evs = &seq.events;
        for (i, a) in evs.iter().enumerate() {
            for b in &evs[i + 1..] {
                if b.time - a.time > window {
                    break;
                }
                if a.entity != b.entity {
                    counts[a.entity][b.entity] += 1;
                    counts[b.entity][a.entity] += 1;
                }
            }
        }
    }
    Ok(CooccurrenceMatrix { counts, window })
}

/// Bins the events of `entity` into half-open intervals `[i*w, (i+1)*w)`;
/// the last bin is closed at the largest horizon of the corpus.
pub fn occurrence_histogram(corpus: &Corpus, entity: EntityId, bin_width: f64) -> Result<Vec<u64>> {
    if entity >= corpus.num_entities() {
        return Err(CorpusError::UnknownEntity(entity));
    }
    if !(bin_width > 0.0) || !bin_width.is_finite() {
        return Err(CorpusError::InvalidArgument(format!(
            "bin width must be positive, got {bin_width}"
        )));
    }
    let bins = ((corpus.max_horizon() / bin_width).ceil() as usize).max(1);
    let mut hist = vec![0u64; bins];
    for seq in &corpus.sequences {
        for ev in seq.events.iter().filter(|e| e.entity == entity) {
            let idx = ((ev.time / bin_width).floor() as usize).min(bins - 1);
            hist[idx] += 1;
        }
    }
    Ok(hist)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(id: &str, evs: &[(EntityId, f64)], horizon: f64) -> EventSequence {
        EventSequence::new(
            id,
            evs.iter()
                .map(|&(entity, time)| Event { entity, time })
                .collect(),
            horizon,
        )
    }

    #[test]
    fn parses_single_event_with_header() {
        let src = "{\"horizon\": 1.0}\n{\"seq\":\"s1\",\"entity\":\"a\",\"t\":0.5}\n";
        let c = parse_corpus_str(src, Format::Jsonl).unwrap();
        assert_eq!(c.num_entities(), 1);
        assert_eq!(c.num_sequences(), 1);
        assert_eq!(c.sequences[0].events, vec![Event { entity: 0, time: 0.5 }]);
        assert_eq!(c.sequences[0].horizon, 1.0);
    }

    #[test]
    fn equal_timestamps_keep_input_order() {
        let src = "{\"seq\":\"s\",\"entity\":\"b\",\"t\":1.0}\n\
                   {\"seq\":\"s\",\"entity\":\"a\",\"t\":1.0}\n\
                   {\"seq\":\"s\",\"entity\":\"c\",\"t\":0.2}\n";
        let c = parse_corpus_str(src, Format::Jsonl).unwrap();
        let names: Vec<_> = c.sequences[0]
            .events
            .iter()
            .map(|e| c.entities[e.entity].name.as_str())
            .collect();
        assert_eq!(names, ["c", "b", "a"]);
        assert_eq!(c.sequences[0].horizon, 1.0);
    }

    #[test]
    fn negative_timestamp_reports_line() {
        let src = "{\"seq\":\"s\",\"entity\":\"a\",\"t\":1.0}\n{\"seq\":\"s\",\"entity\":\"a\",\"t\":-1}\n";
        let err = parse_corpus_str(src, Format::Jsonl).unwrap_err();
        assert_eq!(err.to_string(), "negative timestamp at line 2");
    }

    #[test]
    fn malformed_line_and_empty_corpus() {
        let err = parse_corpus_str("{\"seq\":\"s\",\"entity\":\"a\",\"t\":1}\nnot json\n", Format::Jsonl)
            .unwrap_err();
        assert!(matches!(err, CorpusError::Malformed { line: 2, .. }), "{err}");
        assert!(matches!(
            parse_corpus_str("\n", Format::Jsonl),
            Err(CorpusError::Empty)
        ));
        assert!(matches!(
            parse_corpus_str("seq,entity,t\n", Format::Csv),
            Err(CorpusError::Empty)
        ));
    }

    #[test]
    fn csv_matches_jsonl() {
        let csv = "seq,entity,t\ns1,a,0.5\ns1,b,0.7\ns2,b,1.5\n";
        let jsonl = "{\"seq\":\"s1\",\"entity\":\"a\",\"t\":0.5}\n\
                     {\"seq\":\"s1\",\"entity\":\"b\",\"t\":0.7}\n\
                     {\"seq\":\"s2\",\"entity\":\"b\",\"t\":1.5}\n";
        assert_eq!(
            parse_corpus_str(csv, Format::Csv).unwrap(),
            parse_corpus_str(jsonl, Format::Jsonl).unwrap()
        );
        let err = parse_corpus_str("seq,entity,t\ns1,a,-2\n", Format::Csv).unwrap_err();
        assert_eq!(err.to_string(), "negative timestamp at line 2");
    }

    #[test]
    fn top_entities_by_count() {
        // counts a:5, b:3, c:1
        let c = Corpus::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![seq(
                "s",
                &[(0, 0.0), (0, 1.0), (1, 1.5), (0, 2.0), (2, 2.5), (1, 3.0), (0, 4.0), (1, 4.5), (0, 5.0)],
                6.0,
            )],
        )
        .unwrap();
        let f = filter_top_entities(&c, 2).unwrap();
        assert_eq!(f.names(), ["a", "b"]);
        assert_eq!(f.num_events(), 8);

        let same = filter_top_entities(&c, 3).unwrap();
        assert_eq!(same, c);
        assert_eq!(filter_top_entities(&c, 10).unwrap(), c);
        assert!(filter_top_entities(&c, 0).is_err());
    }

    #[test]
    fn top_entities_tie_prefers_smaller_id() {
        let c = Corpus::new(
            vec!["a".into(), "b".into()],
            vec![
                seq("s1", &[(0, 0.0), (1, 0.5), (0, 1.0)], 2.0),
                seq("s2", &[(1, 0.1), (1, 0.2)], 2.0),
                seq("s3", &[(0, 0.3)], 2.0),
            ],
        )
        .unwrap();
        let f = filter_top_entities(&c, 1).unwrap();
        assert_eq!(f.names(), ["a"]);
        // s2 only held b events
        assert_eq!(f.num_sequences(), 2);
    }

    #[test]
    fn cooccurrence_hand_enumeration() {
        let c = Corpus::new(
            vec!["a".into(), "b".into()],
            vec![
                seq("s1", &[(0, 0.0), (1, 0.5), (0, 1.0)], 1.0),
                seq("s2", &[(1, 0.0), (0, 0.3)], 1.0),
            ],
        )
        .unwrap();
        let m = cooccurrence_counts(&c, 0.6).unwrap();
        assert_eq!(m.get(0, 1), 3);
        assert_eq!(m.get(1, 0), 3);
        assert_eq!(m.get(0, 0), 0);
    }

    #[test]
    fn cooccurrence_zero_window_and_single_entity() {
        let c = Corpus::new(
            vec!["a".into(), "b".into()],
            vec![seq("s", &[(0, 1.0), (1, 1.0), (1, 1.5)], 2.0)],
        )
        .unwrap();
        assert_eq!(cooccurrence_counts(&c, 0.0).unwrap().get(0, 1), 1);

        let single = Corpus::new(vec!["a".into()], vec![seq("s", &[(0, 0.0), (0, 0.1)], 1.0)]).unwrap();
        assert_eq!(cooccurrence_counts(&single, 5.0).unwrap().counts, vec![vec![0]]);
    }

    #[test]
    fn histogram_binning() {
        let c = Corpus::new(
            vec!["a".into(), "b".into()],
            vec![seq("s", &[(0, 0.1), (0, 0.5), (0, 1.5), (1, 1.0)], 2.0)],
        )
        .unwrap();
        assert_eq!(occurrence_histogram(&c, 0, 1.0).unwrap(), vec![2, 1]);
        // boundary event at 1.0 lands in the second bin
        assert_eq!(occurrence_histogram(&c, 1, 1.0).unwrap(), vec![0, 1]);
        assert!(matches!(
            occurrence_histogram(&c, 7, 1.0),
            Err(CorpusError::UnknownEntity(7))
        ));
    }

    #[test]
    fn histogram_of_silent_entity_is_zero() {
        let c = Corpus::new(
            vec!["a".into(), "b".into()],
            vec![seq("s", &[(0, 0.1)], 3.0)],
        )
        .unwrap();
        assert_eq!(occurrence_histogram(&c, 1, 1.0).unwrap(), vec![0, 0, 0]);
    }

    #[test]
    fn jsonl_round_trip_keeps_empty_sequences_and_vocabulary() {
        let c = Corpus::new(
            vec!["z".into(), "a".into(), "unused".into()],
            vec![
                seq("s1", &[(1, 0.5), (0, 0.7)], 3.0),
                seq("s2", &[], 4.0),
                seq("s3", &[(0, 2.0)], 2.0),
            ],
        )
        .unwrap();
        let text = c.to_jsonl_string();
        assert_eq!(parse_corpus_str(&text, Format::Jsonl).unwrap(), c);
    }
}
