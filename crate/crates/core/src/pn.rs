//! Place/transition nets.
//!
//! A [`PetriNet`] is kept in canonical form: places and transitions sorted by
//! id, input arcs sorted by `(place, transition)` and output arcs by
//! `(transition, place)`. Two nets built from the same elements in any order
//! compare equal and serialize to the same bytes.
//!
//! Markings are dense vectors aligned with the net's place order, so the
//! derived ordering on [`Marking`] is the canonical (by place id) ordering.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("invalid identifier {0:?}: must be non-empty printable ASCII without whitespace")]
    InvalidIdentifier(String),
    #[error("invalid label {0:?}")]
    InvalidLabel(String),
    #[error("duplicate place id {0}")]
    DuplicatePlace(String),
    #[error("duplicate transition id {0}")]
    DuplicateTransition(String),
    #[error("unknown place {0}")]
    UnknownPlace(String),
    #[error("unknown transition {0}")]
    UnknownTransition(String),
    #[error("arc {place}/{transition} has weight 0")]
    ZeroWeight { place: String, transition: String },
    #[error("duplicate arc {place}/{transition}")]
    DuplicateArc { place: String, transition: String },
    #[error("structural mismatch: {0}")]
    StructuralMismatch(String),
    #[error("transition {0} is not enabled")]
    NotEnabled(String),
    #[error("operand {operand} uses fusion label {label:?} more than once")]
    DuplicateLabel { operand: usize, label: String },
    #[error("fusion conflict on {label:?}: {detail}")]
    FusionConflict { label: String, detail: String },
    #[error("composition needs at least one net")]
    EmptyComposition,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Place {
    pub id: String,
    /// Fusion label; empty means the place never fuses.
    pub label: String,
    pub tokens: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub id: String,
    pub label: String,
}

/// A weighted arc. Used for both directions; the direction is given by
/// which list of the net holds it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Arc {
    pub place: String,
    pub transition: String,
    pub weight: u32,
}

/// Token counts, one per place, in the place order of the owning net.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Marking(Vec<u32>);

impl Marking {
    pub fn from_counts(counts: Vec<u32>) -> Self {
        Marking(counts)
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, place: usize) -> u32 {
        self.0[place]
    }

    pub fn set(&mut self, place: usize, tokens: u32) {
        self.0[place] = tokens;
    }

    /// True when every count is >= the other's and at least one is greater.
    pub fn strictly_covers(&self, other: &Marking) -> bool {
        self.0.len() == other.0.len()
            && self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
            && self.0 != other.0
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_graphic())
}

fn is_label(s: &str) -> bool {
    s.is_empty() || (is_identifier(s) && s != "-")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PetriNet {
    places: Vec<Place>,
    transitions: Vec<Transition>,
    inputs: Vec<Arc>,
    outputs: Vec<Arc>,
    place_index: HashMap<String, usize>,
    transition_index: HashMap<String, usize>,
    // Per transition: (place index, weight).
    pre: Vec<Vec<(usize, u32)>>,
    post: Vec<Vec<(usize, u32)>>,
}

impl PetriNet {
    pub fn new(
        mut places: Vec<Place>,
        mut transitions: Vec<Transition>,
        mut inputs: Vec<Arc>,
        mut outputs: Vec<Arc>,
    ) -> Result<Self, NetError> {
        places.sort_by(|a, b| a.id.cmp(&b.id));
        transitions.sort_by(|a, b| a.id.cmp(&b.id));
        inputs.sort_by(|a, b| (&a.place, &a.transition).cmp(&(&b.place, &b.transition)));
        outputs.sort_by(|a, b| (&a.transition, &a.place).cmp(&(&b.transition, &b.place)));

        let mut place_index = HashMap::with_capacity(places.len());
        for (i, p) in places.iter().enumerate() {
            if !is_identifier(&p.id) {
                return Err(NetError::InvalidIdentifier(p.id.clone()));
            }
            if !is_label(&p.label) {
                return Err(NetError::InvalidLabel(p.label.clone()));
            }
            if place_index.insert(p.id.clone(), i).is_some() {
                return Err(NetError::DuplicatePlace(p.id.clone()));
            }
        }
        let mut transition_index = HashMap::with_capacity(transitions.len());
        for (i, t) in transitions.iter().enumerate() {
            if !is_identifier(&t.id) {
                return Err(NetError::InvalidIdentifier(t.id.clone()));
            }
            if !is_label(&t.label) {
                return Err(NetError::InvalidLabel(t.label.clone()));
            }
            if transition_index.insert(t.id.clone(), i).is_some() {
                return Err(NetError::DuplicateTransition(t.id.clone()));
            }
        }

        let mut pre = vec![Vec::new(); transitions.len()];
        let mut post = vec![Vec::new(); transitions.len()];
        for (arcs, table) in [(&inputs, &mut pre), (&outputs, &mut post)] {
            let mut seen = BTreeSet::new();
            for arc in arcs.iter() {
                let p = *place_index
                    .get(&arc.place)
                    .ok_or_else(|| NetError::UnknownPlace(arc.place.clone()))?;
                let t = *transition_index
                    .get(&arc.transition)
                    .ok_or_else(|| NetError::UnknownTransition(arc.transition.clone()))?;
                if arc.weight == 0 {
                    return Err(NetError::ZeroWeight {
                        place: arc.place.clone(),
                        transition: arc.transition.clone(),
                    });
                }
                if !seen.insert((p, t)) {
                    return Err(NetError::DuplicateArc {
                        place: arc.place.clone(),
                        transition: arc.transition.clone(),
                    });
                }
                table[t].push((p, arc.weight));
            }
        }
        for list in pre.iter_mut().chain(post.iter_mut()) {
            list.sort_unstable();
        }

        Ok(PetriNet {
            places,
            transitions,
            inputs,
            outputs,
            place_index,
            transition_index,
            pre,
            post,
        })
    }

    pub fn places(&self) -> &[Place] {
        &self.places
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn inputs(&self) -> &[Arc] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Arc] {
        &self.outputs
    }

    pub fn place_index(&self, id: &str) -> Option<usize> {
        self.place_index.get(id).copied()
    }

    pub fn transition_index(&self, id: &str) -> Option<usize> {
        self.transition_index.get(id).copied()
    }

    pub fn place_by_label(&self, label: &str) -> Option<usize> {
        if label.is_empty() {
            return None;
        }
        self.places.iter().position(|p| p.label == label)
    }

    pub fn transition_by_label(&self, label: &str) -> Option<usize> {
        if label.is_empty() {
            return None;
        }
        self.transitions.iter().position(|t| t.label == label)
    }

    /// Input places of transition `t` as `(place index, weight)`.
    pub fn preset(&self, t: usize) -> &[(usize, u32)] {
        &self.pre[t]
    }

    pub fn postset(&self, t: usize) -> &[(usize, u32)] {
        &self.post[t]
    }

    pub fn initial_marking(&self) -> Marking {
        Marking(self.places.iter().map(|p| p.tokens).collect())
    }

    /// Builds a marking from `(place id, tokens)` pairs; unlisted places get 0.
    pub fn marking_from<'a, I>(&self, pairs: I) -> Result<Marking, NetError>
    where
        I: IntoIterator<Item = (&'a str, u32)>,
    {
        let mut counts = vec![0; self.places.len()];
        for (id, n) in pairs {
            let i = self
                .place_index(id)
                .ok_or_else(|| NetError::StructuralMismatch(format!("unknown place {id}")))?;
            counts[i] = n;
        }
        Ok(Marking(counts))
    }

    /// Same structure, different initial marking.
    pub fn with_initial_marking(&self, m: &Marking) -> Result<PetriNet, NetError> {
        self.check_marking(m)?;
        let mut net = self.clone();
        for (p, &n) in net.places.iter_mut().zip(m.counts()) {
            p.tokens = n;
        }
        Ok(net)
    }

    fn check_marking(&self, m: &Marking) -> Result<(), NetError> {
        if m.len() != self.places.len() {
            return Err(NetError::StructuralMismatch(format!(
                "marking has {} entries, net has {} places",
                m.len(),
                self.places.len()
            )));
        }
        Ok(())
    }

    /// Enabling test by transition index. The marking must belong to this net.
    pub fn is_enabled_at(&self, t: usize, m: &Marking) -> bool {
        self.pre[t].iter().all(|&(p, w)| m.0[p] >= w)
    }

    /// Indices of transitions enabled at `m`, in id order.
    pub fn enabled_indices(&self, m: &Marking) -> Result<Vec<usize>, NetError> {
        self.check_marking(m)?;
        Ok((0..self.transitions.len())
            .filter(|&t| self.is_enabled_at(t, m))
            .collect())
    }

    pub fn enabled_transitions(&self, m: &Marking) -> Result<Vec<String>, NetError> {
        Ok(self
            .enabled_indices(m)?
            .into_iter()
            .map(|t| self.transitions[t].id.clone())
            .collect())
    }

    pub fn fire_at(&self, t: usize, m: &Marking) -> Result<Marking, NetError> {
        self.check_marking(m)?;
        let tr = self
            .transitions
            .get(t)
            .ok_or_else(|| NetError::UnknownTransition(format!("#{t}")))?;
        if !self.is_enabled_at(t, m) {
            return Err(NetError::NotEnabled(tr.id.clone()));
        }
        let mut next = m.clone();
        for &(p, w) in &self.pre[t] {
            next.0[p] -= w;
        }
        for &(p, w) in &self.post[t] {
            next.0[p] += w;
        }
        Ok(next)
    }

    pub fn fire(&self, m: &Marking, transition: &str) -> Result<Marking, NetError> {
        let t = self
            .transition_index(transition)
            .ok_or_else(|| NetError::StructuralMismatch(format!("unknown transition {transition}")))?;
        self.fire_at(t, m)
    }

    /// Nonzero entries as `id=count`, space separated, in place order.
    pub fn display_marking(&self, m: &Marking) -> String {
        let parts: Vec<String> = self
            .places
            .iter()
            .zip(m.counts())
            .filter(|(_, &n)| n > 0)
            .map(|(p, n)| format!("{}={}", p.id, n))
            .collect();
        if parts.is_empty() {
            "(empty)".to_string()
        } else {
            parts.join(" ")
        }
    }

    /// Net with every arc reversed.
    pub fn reversed(&self) -> PetriNet {
        PetriNet::new(
            self.places.clone(),
            self.transitions.clone(),
            self.outputs.clone(),
            self.inputs.clone(),
        )
        .expect("reversing a valid net keeps it valid")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let label = |l: &str| if l.is_empty() { "-".to_string() } else { l.to_string() };
        for p in &self.places {
            let _ = writeln!(out, "place {} {} {}", p.id, label(&p.label), p.tokens);
        }
        for t in &self.transitions {
            let _ = writeln!(out, "transition {} {}", t.id, label(&t.label));
        }
        for a in &self.inputs {
            let _ = writeln!(out, "in {} {} {}", a.place, a.transition, a.weight);
        }
        for a in &self.outputs {
            let _ = writeln!(out, "out {} {} {}", a.transition, a.place, a.weight);
        }
        out
    }

    /// Parses the line format written by [`PetriNet::to_text`]. Blank lines and
    /// `#` comments are skipped.
    pub fn from_text(text: &str) -> Result<PetriNet, NetError> {
        let mut places = Vec::new();
        let mut transitions = Vec::new();
        let mut inputs = Vec::new();
        let mut outputs = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = no + 1;
            let err = |message: String| NetError::Parse { line, message };
            if !raw.is_ascii() {
                return Err(err("non-ASCII text".into()));
            }
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let fields: Vec<&str> = body.split_whitespace().collect();
            let num = |s: &str| -> Result<u32, NetError> {
                s.parse::<u32>()
                    .map_err(|_| err(format!("expected a non-negative integer, found {s:?}")))
            };
            let label = |s: &str| if s == "-" { String::new() } else { s.to_string() };
            match fields.as_slice() {
                ["place", id, l, n] => places.push(Place {
                    id: id.to_string(),
                    label: label(l),
                    tokens: num(n)?,
                }),
                ["transition", id, l] => transitions.push(Transition {
                    id: id.to_string(),
                    label: label(l),
                }),
                ["in", p, t, w] => inputs.push(Arc {
                    place: p.to_string(),
                    transition: t.to_string(),
                    weight: num(w)?,
                }),
                ["out", t, p, w] => outputs.push(Arc {
                    place: p.to_string(),
                    transition: t.to_string(),
                    weight: num(w)?,
                }),
                _ => return Err(err(format!("unrecognized record {body:?}"))),
            }
        }
        PetriNet::new(places, transitions, inputs, outputs)
    }
}

impl fmt::Display for PetriNet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Incremental construction helper.
#[derive(Debug, Default, Clone)]
pub struct NetBuilder {
    places: Vec<Place>,
    transitions: Vec<Transition>,
    inputs: Vec<Arc>,
    outputs: Vec<Arc>,
}

impl NetBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn place(&mut self, id: &str, label: &str, tokens: u32) -> &mut Self {
        self.places.push(Place {
            id: id.into(),
            label: label.into(),
            tokens,
        });
        self
    }

    pub fn transition(&mut self, id: &str, label: &str) -> &mut Self {
        self.transitions.push(Transition {
            id: id.into(),
            label: label.into(),
        });
        self
    }

    /// Arc place -> transition.
    pub fn input(&mut self, place: &str, transition: &str, weight: u32) -> &mut Self {
        self.inputs.push(Arc {
            place: place.into(),
            transition: transition.into(),
            weight,
        });
        self
    }

    /// Arc transition -> place.
    pub fn output(&mut self, transition: &str, place: &str, weight: u32) -> &mut Self {
        self.outputs.push(Arc {
            place: place.into(),
            transition: transition.into(),
            weight,
        });
        self
    }

    pub fn build(&self) -> Result<PetriNet, NetError> {
        PetriNet::new(
            self.places.clone(),
            self.transitions.clone(),
            self.inputs.clone(),
            self.outputs.clone(),
        )
    }
}

// Element of one operand: (operand index, original id).
type Origin = (usize, String);

struct Unit {
    origin: Origin,
    label: String,
    members: Vec<Origin>,
    tokens: u32,
}

fn group_units<'a>(
    elements: impl Iterator<Item = (usize, &'a str, &'a str, u32)>,
    kind: &str,
) -> Result<Vec<Unit>, NetError> {
    let mut units: Vec<Unit> = Vec::new();
    let mut by_label: BTreeMap<String, usize> = BTreeMap::new();
    let mut seen_in_operand: BTreeSet<(usize, String)> = BTreeSet::new();
    for (op, id, label, tokens) in elements {
        let origin = (op, id.to_string());
        if label.is_empty() {
            units.push(Unit {
                origin: origin.clone(),
                label: String::new(),
                members: vec![origin],
                tokens,
            });
            continue;
        }
        if !seen_in_operand.insert((op, label.to_string())) {
            return Err(NetError::DuplicateLabel {
                operand: op,
                label: label.to_string(),
            });
        }
        match by_label.get(label) {
            Some(&u) => {
                let unit = &mut units[u];
                // Zero tokens on a fused place means "left to the other operands".
                if tokens != 0 {
                    if unit.tokens != 0 && unit.tokens != tokens {
                        return Err(NetError::FusionConflict {
                            label: label.to_string(),
                            detail: format!(
                                "{kind} initial tokens {} vs {}",
                                unit.tokens, tokens
                            ),
                        });
                    }
                    unit.tokens = tokens;
                }
                unit.members.push(origin);
            }
            None => {
                by_label.insert(label.to_string(), units.len());
                units.push(Unit {
                    origin: origin.clone(),
                    label: label.to_string(),
                    members: vec![origin],
                    tokens,
                });
            }
        }
    }
    units.sort_by(|a, b| a.origin.cmp(&b.origin));
    Ok(units)
}

// Keeps the representative's original id when free, otherwise suffixes it
// with the operand index (and a counter if that is still taken).
fn assign_ids(units: &[Unit]) -> (Vec<String>, HashMap<Origin, String>) {
    let mut taken = BTreeSet::new();
    let mut ids = Vec::with_capacity(units.len());
    let mut map = HashMap::new();
    for unit in units {
        let (op, id) = &unit.origin;
        let mut candidate = id.clone();
        if taken.contains(&candidate) {
            candidate = format!("{id}@{op}");
            let mut k = 1;
            while taken.contains(&candidate) {
                candidate = format!("{id}@{op}.{k}");
                k += 1;
            }
        }
        taken.insert(candidate.clone());
        for m in &unit.members {
            map.insert(m.clone(), candidate.clone());
        }
        ids.push(candidate);
    }
    (ids, map)
}

/// Disjoint union of `nets`, then every group of places (and of transitions)
/// sharing a non-empty label is merged into one element.
///
/// Fused places take the common non-zero initial token count; two different
/// non-zero counts are a [`NetError::FusionConflict`]. Arcs are unioned; the
/// same arc reached twice must carry the same weight.
pub fn fuse_compose(nets: &[PetriNet]) -> Result<PetriNet, NetError> {
    if nets.is_empty() {
        return Err(NetError::EmptyComposition);
    }
    let place_units = group_units(
        nets.iter().enumerate().flat_map(|(op, n)| {
            n.places
                .iter()
                .map(move |p| (op, p.id.as_str(), p.label.as_str(), p.tokens))
        }),
        "place",
    )?;
    let transition_units = group_units(
        nets.iter().enumerate().flat_map(|(op, n)| {
            n.transitions
                .iter()
                .map(move |t| (op, t.id.as_str(), t.label.as_str(), 0))
        }),
        "transition",
    )?;
    let (place_ids, place_map) = assign_ids(&place_units);
    let (transition_ids, transition_map) = assign_ids(&transition_units);

    let places = place_units
        .iter()
        .zip(place_ids)
        .map(|(u, id)| Place {
            id,
            label: u.label.clone(),
            tokens: u.tokens,
        })
        .collect();
    let transitions = transition_units
        .iter()
        .zip(transition_ids)
        .map(|(u, id)| Transition {
            id,
            label: u.label.clone(),
        })
        .collect();

    let mut arcs: [BTreeMap<(String, String), u32>; 2] = [BTreeMap::new(), BTreeMap::new()];
    for (op, net) in nets.iter().enumerate() {
        for (dir, list) in [(0, &net.inputs), (1, &net.outputs)] {
            for arc in list {
                let p = place_map[&(op, arc.place.clone())].clone();
                let t = transition_map[&(op, arc.transition.clone())].clone();
                match arcs[dir].get(&(p.clone(), t.clone())) {
                    Some(&w) if w != arc.weight => {
                        return Err(NetError::FusionConflict {
                            label: format!("{p}/{t}"),
                            detail: format!("arc weight {w} vs {}", arc.weight),
                        })
                    }
                    _ => {
                        arcs[dir].insert((p, t), arc.weight);
                    }
                }
            }
        }
    }
    let [ins, outs] = arcs;
    let to_arcs = |m: BTreeMap<(String, String), u32>| -> Vec<Arc> {
        m.into_iter()
            .map(|((place, transition), weight)| Arc {
                place,
                transition,
                weight,
            })
            .collect()
    };
    PetriNet::new(places, transitions, to_arcs(ins), to_arcs(outs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn chain() -> PetriNet {
        NetBuilder::new()
            .place("p1", "", 1)
            .place("p2", "", 0)
            .transition("t", "")
            .input("p1", "t", 1)
            .output("t", "p2", 1)
            .build()
            .unwrap()
    }

    #[test]
    fn enabling_rule() {
        let net = chain();
        let m = net.initial_marking();
        assert_eq!(net.enabled_transitions(&m).unwrap(), vec!["t"]);
        let empty = net.marking_from([("p1", 0)]).unwrap();
        assert!(net.enabled_transitions(&empty).unwrap().is_empty());
    }

    #[test]
    fn firing_moves_tokens_and_leaves_input_untouched() {
        let net = chain();
        let m = net.initial_marking();
        let next = net.fire(&m, "t").unwrap();
        assert_eq!(next.counts(), &[0, 1]);
        assert_eq!(m.counts(), &[1, 0]);
        assert_eq!(net.fire(&next, "t"), Err(NetError::NotEnabled("t".into())));
    }

    #[test]
    fn structural_mismatches() {
        let net = chain();
        assert!(matches!(
            net.marking_from([("zz", 1)]),
            Err(NetError::StructuralMismatch(_))
        ));
        let short = Marking::from_counts(vec![1]);
        assert!(matches!(
            net.enabled_transitions(&short),
            Err(NetError::StructuralMismatch(_))
        ));
        assert!(matches!(
            net.fire(&net.initial_marking(), "nope"),
            Err(NetError::StructuralMismatch(_))
        ));
    }

    #[test]
    fn construction_rejects_bad_nets() {
        let mut b = NetBuilder::new();
        b.place("p", "", 0).place("p", "", 0);
        assert_eq!(b.build(), Err(NetError::DuplicatePlace("p".into())));

        let mut b = NetBuilder::new();
        b.place("p", "", 0).transition("t", "").input("p", "t", 0);
        assert!(matches!(b.build(), Err(NetError::ZeroWeight { .. })));

        let mut b = NetBuilder::new();
        b.transition("t", "").input("q", "t", 1);
        assert_eq!(b.build(), Err(NetError::UnknownPlace("q".into())));

        let mut b = NetBuilder::new();
        b.place("has space", "", 0);
        assert!(matches!(b.build(), Err(NetError::InvalidIdentifier(_))));
    }

    #[test]
    fn single_operand_composition_is_identity() {
        let net = chain();
        assert_eq!(fuse_compose(std::slice::from_ref(&net)).unwrap(), net);
    }

    #[test]
    fn shared_resource_label_fuses() {
        let a = NetBuilder::new()
            .place("R1", "R1", 2)
            .place("a", "", 1)
            .transition("ta", "")
            .input("R1", "ta", 1)
            .input("a", "ta", 1)
            .build()
            .unwrap();
        let b = NetBuilder::new()
            .place("R1", "R1", 2)
            .place("b", "", 1)
            .transition("tb", "")
            .input("R1", "tb", 1)
            .input("b", "tb", 1)
            .build()
            .unwrap();
        let fused = fuse_compose(&[a, b]).unwrap();
        let r1: Vec<_> = fused.places().iter().filter(|p| p.label == "R1").collect();
        assert_eq!(r1.len(), 1);
        assert_eq!(r1[0].tokens, 2);
        let r1_arcs = fused.inputs().iter().filter(|a| a.place == "R1").count();
        assert_eq!(r1_arcs, 2);
    }

    #[test]
    fn unmarked_operand_defers_to_marked_one_but_marked_ones_must_agree() {
        let mk = |tokens| {
            NetBuilder::new()
                .place("R", "R", tokens)
                .build()
                .unwrap()
        };
        let fused = fuse_compose(&[mk(0), mk(3)]).unwrap();
        assert_eq!(fused.places()[0].tokens, 3);
        assert!(matches!(
            fuse_compose(&[mk(2), mk(3)]),
            Err(NetError::FusionConflict { .. })
        ));
    }

    #[test]
    fn colliding_unlabeled_ids_are_renamed() {
        let fused = fuse_compose(&[chain(), chain()]).unwrap();
        let ids: Vec<_> = fused.places().iter().map(|p| p.id.as_str()).collect();
        assert_eq!(ids, vec!["p1", "p1@1", "p2", "p2@1"]);
        assert_eq!(fused.transitions().len(), 2);
    }

    #[test]
    fn duplicate_label_inside_operand_is_rejected() {
        let bad = NetBuilder::new()
            .place("x", "L", 0)
            .place("y", "L", 0)
            .build()
            .unwrap();
        assert!(matches!(
            fuse_compose(&[bad]),
            Err(NetError::DuplicateLabel { .. })
        ));
    }

    #[test]
    fn text_round_trip_is_exact() {
        let text = "place R1 R1 2\nplace a - 1\ntransition t lbl\nin R1 t 1\nin a t 2\nout t a 1\n";
        let net = PetriNet::from_text(text).unwrap();
        assert_eq!(net.to_text(), text);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = PetriNet::from_text("place a - 1\n\nbogus line\n").unwrap_err();
        assert_eq!(
            err,
            NetError::Parse {
                line: 3,
                message: "unrecognized record \"bogus line\"".into()
            }
        );
    }

    // Small random nets where every element carries a label drawn from a
    // tiny alphabet so that fusion actually happens.
    fn arb_labeled_net() -> impl Strategy<Value = PetriNet> {
        let places = proptest::collection::btree_map(0u8..5, 0u32..3, 1..4);
        let transitions = proptest::collection::btree_set(0u8..4, 1..3);
        (places, transitions)
            .prop_flat_map(|(places, transitions)| {
                let pl: Vec<u8> = places.keys().copied().collect();
                let tl: Vec<u8> = transitions.iter().copied().collect();
                let arcs = proptest::collection::btree_map(
                    (proptest::sample::select(pl.clone()), proptest::sample::select(tl.clone())),
                    1u32..3,
                    0..5,
                );
                let outs = proptest::collection::btree_map(
                    (proptest::sample::select(tl), proptest::sample::select(pl)),
                    1u32..3,
                    0..5,
                );
                (Just(places), Just(transitions), arcs, outs)
            })
            .prop_map(|(places, transitions, ins, outs)| {
                let mut b = NetBuilder::new();
                for (p, n) in &places {
                    let id = format!("p{p}");
                    b.place(&id, &id, *n);
                }
                for t in &transitions {
                    let id = format!("t{t}");
                    b.transition(&id, &id);
                }
                for ((p, t), w) in ins {
                    b.input(&format!("p{p}"), &format!("t{t}"), w);
                }
                for ((t, p), w) in outs {
                    b.output(&format!("t{t}"), &format!("p{p}"), w);
                }
                b.build().unwrap()
            })
    }

    type Canon = (
        BTreeMap<String, u32>,
        BTreeSet<String>,
        BTreeSet<(String, String, u32)>,
        BTreeSet<(String, String, u32)>,
    );

    // Label-keyed form; with all elements labeled it identifies a net up to
    // isomorphism.
    fn canonical(net: &PetriNet) -> Canon {
        let pl = |id: &str| net.places()[net.place_index(id).unwrap()].label.clone();
        let tl = |id: &str| net.transitions()[net.transition_index(id).unwrap()].label.clone();
        (
            net.places().iter().map(|p| (p.label.clone(), p.tokens)).collect(),
            net.transitions().iter().map(|t| t.label.clone()).collect(),
            net.inputs()
                .iter()
                .map(|a| (pl(&a.place), tl(&a.transition), a.weight))
                .collect(),
            net.outputs()
                .iter()
                .map(|a| (tl(&a.transition), pl(&a.place), a.weight))
                .collect(),
        )
    }

    fn compose_canon(nets: &[PetriNet]) -> Option<Canon> {
        fuse_compose(nets).ok().map(|n| canonical(&n))
    }

    proptest! {
        #[test]
        fn firing_keeps_markings_nonnegative_and_is_closed(net in arb_labeled_net(), steps in 0usize..12) {
            let mut m = net.initial_marking();
            for step in 0..steps {
                let enabled = net.enabled_indices(&m).unwrap();
                if enabled.is_empty() { break; }
                let t = enabled[step % enabled.len()];
                let before: u64 = m.counts().iter().map(|&c| c as u64).sum();
                m = net.fire_at(t, &m).unwrap();
                let consumed: u64 = net.preset(t).iter().map(|&(_, w)| w as u64).sum();
                let produced: u64 = net.postset(t).iter().map(|&(_, w)| w as u64).sum();
                let after: u64 = m.counts().iter().map(|&c| c as u64).sum();
                prop_assert_eq!(after, before - consumed + produced);
                prop_assert!(net.enabled_indices(&m).is_ok());
            }
        }

        #[test]
        fn reverse_firing_restores_marking(net in arb_labeled_net()) {
            let rev = net.reversed();
            let m = net.initial_marking();
            for t in net.enabled_indices(&m).unwrap() {
                let next = net.fire_at(t, &m).unwrap();
                let back = rev.fire_at(t, &next).unwrap();
                prop_assert_eq!(&back, &m);
            }
        }

        #[test]
        fn composition_commutes(a in arb_labeled_net(), b in arb_labeled_net()) {
            prop_assert_eq!(compose_canon(&[a.clone(), b.clone()]), compose_canon(&[b, a]));
        }

        #[test]
        fn composition_associates(a in arb_labeled_net(), b in arb_labeled_net(), c in arb_labeled_net()) {
            let flat = compose_canon(&[a.clone(), b.clone(), c.clone()]);
            let left = fuse_compose(&[a.clone(), b.clone()])
                .ok()
                .and_then(|ab| compose_canon(&[ab, c.clone()]));
            let right = fuse_compose(&[b, c])
                .ok()
                .and_then(|bc| compose_canon(&[a, bc]));
            prop_assert_eq!(&flat, &left);
            prop_assert_eq!(&flat, &right);
        }

        #[test]
        fn serialization_round_trips(net in arb_labeled_net()) {
            let text = net.to_text();
            let back = PetriNet::from_text(&text).unwrap();
            prop_assert_eq!(back.to_text(), text);
            prop_assert_eq!(back, net);
        }
    }
}
