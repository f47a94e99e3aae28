//! The episodic store: top-state elements stamped with the interval during
//! which they existed, and one episode per recorded cycle.

use std::collections::{BTreeMap, BTreeSet};

use crate::data::{Ms, Triple};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct EmEvent {
    pub triple: Triple,
    pub added: Ms,
    /// `None` while the element is still present.
    pub removed: Option<Ms>,
}

impl EmEvent {
    pub fn contains(&self, t: Ms) -> bool {
        self.added <= t && self.removed.is_none_or(|r| t < r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Episode {
    /// Position in the episode index.
    pub index: usize,
    pub cycle: u64,
    pub time: Ms,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Next,
    Prev,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EpisodicStore {
    events: Vec<EmEvent>,
    open: BTreeMap<Triple, usize>,
    by_triple: BTreeMap<Triple, Vec<usize>>,
    episodes: Vec<(u64, Ms)>,
}

impl EpisodicStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn events(&self) -> &[EmEvent] {
        &self.events
    }

    pub fn episodes(&self) -> &[(u64, Ms)] {
        &self.episodes
    }

    pub fn len(&self) -> usize {
        self.episodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.episodes.is_empty()
    }

    pub fn episode(&self, index: usize) -> Option<Episode> {
        self.episodes.get(index).map(|&(cycle, time)| Episode { index, cycle, time })
    }

    /// Records one cycle's changes to the top state. Additions open an
    /// interval at `now`, removals close theirs.
    pub fn record(&mut self, added: &[Triple], removed: &[Triple], cycle: u64, now: Ms) {
        for t in removed {
            if let Some(i) = self.open.remove(t) {
                self.events[i].removed = Some(now);
            }
        }
        for t in added {
            if self.open.contains_key(t) {
                continue;
            }
            let i = self.events.len();
            self.events.push(EmEvent { triple: t.clone(), added: now, removed: None });
            self.open.insert(t.clone(), i);
            self.by_triple.entry(t.clone()).or_default().push(i);
        }
        self.episodes.push((cycle, now));
    }

    /// Restores a store from its parts; used by snapshot loading.
    pub(crate) fn from_parts(events: Vec<EmEvent>, episodes: Vec<(u64, Ms)>) -> EpisodicStore {
        let mut s = EpisodicStore { episodes, ..Default::default() };
        for e in events {
            let i = s.events.len();
            if e.removed.is_none() {
                s.open.insert(e.triple.clone(), i);
            }
            s.by_triple.entry(e.triple.clone()).or_default().push(i);
            s.events.push(e);
        }
        s
    }

    fn present(&self, t: &Triple, time: Ms) -> bool {
        self.by_triple.get(t).is_some_and(|ix| ix.iter().any(|&i| self.events[i].contains(time)))
    }

    /// Number of cue triples the episode at `index` contains.
    pub fn score(&self, index: usize, cue: &[Triple]) -> usize {
        let time = self.episodes[index].1;
        cue.iter().filter(|t| self.present(t, time)).count()
    }

    /// The most recent episode containing every cue triple; failing that,
    /// the one containing the most, ties to the most recent. An episode
    /// must contain at least one cue triple to be returned.
    pub fn retrieve(&self, cue: &[Triple]) -> Option<Episode> {
        let mut cue: Vec<Triple> = cue.to_vec();
        cue.sort();
        cue.dedup();
        if cue.is_empty() {
            return None;
        }
        let mut best: Option<(usize, usize)> = None;
        for index in (0..self.episodes.len()).rev() {
            let score = self.score(index, &cue);
            if score == cue.len() {
                return self.episode(index);
            }
            if score > 0 && best.is_none_or(|(_, s)| score > s) {
                best = Some((index, score));
            }
        }
        best.and_then(|(i, _)| self.episode(i))
    }

    /// The adjacent episode.
    pub fn step(&self, from: &Episode, direction: Direction) -> Option<Episode> {
        match direction {
            Direction::Next => self.episode(from.index + 1),
            Direction::Prev => from.index.checked_sub(1).and_then(|i| self.episode(i)),
        }
    }

    /// Everything the top state held at the episode.
    pub fn reconstruct(&self, episode: &Episode) -> BTreeSet<Triple> {
        self.events.iter().filter(|e| e.contains(episode.time)).map(|e| e.triple.clone()).collect()
    }
}
