//! Cross-validation split generators. Each protocol holds out one entity per
//! fold: a subject, a chair, or a (subject, chair) pair. Test sets contain
//! only real recordings; synthetic ones augment training and are dropped
//! whenever they feature the held-out entity.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    LeaveOneUserOut,
    LeaveOneChairOut,
    LeaveOneUserChairOut,
}

impl Protocol {
    pub fn name(&self) -> &'static str {
        match self {
            Protocol::LeaveOneUserOut => "louocv",
            Protocol::LeaveOneChairOut => "lococv",
            Protocol::LeaveOneUserChairOut => "locuocv",
        }
    }

    pub fn from_name(name: &str) -> Option<Protocol> {
        match name {
            "louocv" => Some(Protocol::LeaveOneUserOut),
            "lococv" => Some(Protocol::LeaveOneChairOut),
            "locuocv" => Some(Protocol::LeaveOneUserChairOut),
            _ => None,
        }
    }
}

/// One roster line: enough of a recording's labels to place it in a fold.
#[derive(Debug, Clone)]
pub struct RosterEntry {
    pub id: String,
    pub subject_id: String,
    pub chair_id: String,
    pub synthetic: bool,
}

#[derive(Debug, Clone)]
pub struct Fold {
    pub held_subject: Option<String>,
    pub held_chair: Option<String>,
    pub train: Vec<String>,
    pub test: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SplitPlan {
    pub protocol: Protocol,
    pub folds: Vec<Fold>,
}

fn build_fold(
    roster: &[RosterEntry],
    held_subject: Option<&str>,
    held_chair: Option<&str>,
) -> Fold {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for e in roster {
        let subject_held = held_subject.is_some_and(|s| e.subject_id == s);
        let chair_held = held_chair.is_some_and(|c| e.chair_id == c);
        let matches_all = held_subject.map_or(true, |s| e.subject_id == s)
            && held_chair.map_or(true, |c| e.chair_id == c);
        if matches_all && !e.synthetic {
            test.push(e.id.clone());
        } else if !subject_held && !chair_held {
            train.push(e.id.clone());
        }
        // Anything else touches the held-out entity without being a real
        // test recording; it is dropped for this fold.
    }
    Fold {
        held_subject: held_subject.map(str::to_owned),
        held_chair: held_chair.map(str::to_owned),
        train,
        test,
    }
}

/// Generates one fold per held-out entity found among the real recordings.
/// Fold order follows the sorted entity names, so plans are deterministic.
pub fn make_splits(roster: &[RosterEntry], protocol: Protocol) -> Result<SplitPlan> {
    let mut seen = BTreeSet::new();
    for e in roster {
        if !seen.insert(e.id.as_str()) {
            return Err(Error::Split(format!("duplicate recording id {:?}", e.id)));
        }
    }

    let real: Vec<&RosterEntry> = roster.iter().filter(|e| !e.synthetic).collect();
    let subjects: BTreeSet<&str> = real.iter().map(|e| e.subject_id.as_str()).collect();
    let chairs: BTreeSet<&str> = real.iter().map(|e| e.chair_id.as_str()).collect();

    let need = |label: &str, count: usize| {
        if count < 2 {
            Err(Error::Split(format!(
                "{} needs at least 2 {label} among real recordings, found {count}",
                protocol.name()
            )))
        } else {
            Ok(())
        }
    };

    let folds = match protocol {
        Protocol::LeaveOneUserOut => {
            need("subjects", subjects.len())?;
            subjects.iter().map(|s| build_fold(roster, Some(s), None)).collect()
        }
        Protocol::LeaveOneChairOut => {
            need("chairs", chairs.len())?;
            chairs.iter().map(|c| build_fold(roster, None, Some(c))).collect()
        }
        Protocol::LeaveOneUserChairOut => {
            need("subjects", subjects.len())?;
            need("chairs", chairs.len())?;
            let pairs: BTreeSet<(&str, &str)> =
                real.iter().map(|e| (e.subject_id.as_str(), e.chair_id.as_str())).collect();
            pairs.iter().map(|(s, c)| build_fold(roster, Some(s), Some(c))).collect()
        }
    };

    Ok(SplitPlan { protocol, folds })
}
