use thiserror::Error;

use super::{Elem, Structure};
use crate::logic::Signature;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnumerateError {
    #[error("size must be at least 1")]
    ZeroSize,
    #[error("{atoms} possible atoms on {size} elements; at most 64 are supported")]
    TooManyAtoms { size: usize, atoms: usize },
}

/// Every possible atom over `{0..k}`, ordered by relation name then tuple.
fn atom_space(sig: &Signature, k: usize) -> Vec<(String, Vec<Elem>)> {
    let mut out = Vec::new();
    for (rel, arity) in sig.iter() {
        let mut tuples = vec![Vec::new()];
        for _ in 0..arity {
            tuples = tuples
                .into_iter()
                .flat_map(|t: Vec<Elem>| {
                    (0..k).map(move |e| {
                        let mut t = t.clone();
                        t.push(e);
                        t
                    })
                })
                .collect();
        }
        out.extend(tuples.into_iter().map(|t| (rel.to_string(), t)));
    }
    out
}

fn permutations(k: usize) -> Vec<Vec<Elem>> {
    fn go(prefix: &mut Vec<Elem>, used: &mut [bool], out: &mut Vec<Vec<Elem>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for e in 0..used.len() {
            if !used[e] {
                used[e] = true;
                prefix.push(e);
                go(prefix, used, out);
                prefix.pop();
                used[e] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

/// Enumerates structures over `{e1..ek}` for `k = 1..=size`, each atom set encoded as a
/// bitmask over [`atom_space`]. With isomorphism reduction only masks that are minimal
/// within their orbit under universe permutations are produced.
pub struct StructureEnumerator {
    sig: Signature,
    size: usize,
    iso: bool,
    k: usize,
    next_mask: u64,
    atoms: Vec<(String, Vec<Elem>)>,
    /// For each non-identity permutation, the image index of every atom.
    images: Vec<Vec<usize>>,
}

impl StructureEnumerator {
    pub fn new(sig: &Signature, size: usize, iso: bool) -> Result<Self, EnumerateError> {
        if size == 0 {
            return Err(EnumerateError::ZeroSize);
        }
        let largest = atom_space(sig, size).len();
        if largest > 64 {
            return Err(EnumerateError::TooManyAtoms { size, atoms: largest });
        }
        let mut e = StructureEnumerator {
            sig: sig.clone(),
            size,
            iso,
            k: 0,
            next_mask: 0,
            atoms: Vec::new(),
            images: Vec::new(),
        };
        e.start_size(1);
        Ok(e)
    }

    /// Structures without isomorphism reduction.
    pub fn raw(sig: &Signature, size: usize) -> Result<Self, EnumerateError> {
        Self::new(sig, size, false)
    }

    fn start_size(&mut self, k: usize) {
        self.k = k;
        self.next_mask = 0;
        self.atoms = atom_space(&self.sig, k);
        self.images = if self.iso {
            permutations(k)
                .into_iter()
                .skip(1)
                .map(|perm| {
                    self.atoms
                        .iter()
                        .map(|(r, t)| {
                            let img: Vec<Elem> = t.iter().map(|&e| perm[e]).collect();
                            self.atoms.iter().position(|(r2, t2)| r2 == r && *t2 == img).expect("closed")
                        })
                        .collect()
                })
                .collect()
        } else {
            Vec::new()
        };
    }

    fn limit(&self) -> u64 {
        if self.atoms.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.atoms.len()) - 1
        }
    }

    fn is_canonical(&self, mask: u64) -> bool {
        self.images.iter().all(|img| {
            let mut m = 0u64;
            let mut bits = mask;
            while bits != 0 {
                let i = bits.trailing_zeros() as usize;
                m |= 1 << img[i];
                bits &= bits - 1;
            }
            m >= mask
        })
    }

    fn build(&self, mask: u64) -> Structure {
        let mut s = Structure::with_elements(self.sig.clone(), self.k);
        for (i, (r, t)) in self.atoms.iter().enumerate() {
            if mask & (1 << i) != 0 {
                s.add_atom(r, t).expect("atom space matches signature");
            }
        }
        s
    }
}

impl Iterator for StructureEnumerator {
    type Item = Structure;

    fn next(&mut self) -> Option<Structure> {
        loop {
            if self.k > self.size {
                return None;
            }
            let limit = self.limit();
            while self.next_mask <= limit {
                let mask = self.next_mask;
                let exhausted = mask == limit;
                self.next_mask = self.next_mask.wrapping_add(1);
                if !self.iso || self.is_canonical(mask) {
                    let s = self.build(mask);
                    if exhausted {
                        self.start_size(self.k + 1);
                    }
                    return Some(s);
                }
                if exhausted {
                    break;
                }
            }
            self.start_size(self.k + 1);
        }
    }
}

/// All structures with at most `size` elements, one per isomorphism class, smaller
/// universes first.
pub fn enumerate_structures(sig: &Signature, size: usize) -> Result<StructureEnumerator, EnumerateError> {
    StructureEnumerator::new(sig, size, true)
}

/// Number of structures with exactly `k` elements, optionally up to isomorphism.
pub fn count_structures(sig: &Signature, k: usize, iso: bool) -> Result<usize, EnumerateError> {
    Ok(StructureEnumerator::new(sig, k, iso)?.filter(|s| s.len() == k).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn e2() -> Signature {
        Signature::new().with("E", 2)
    }

    /// Independent oracle: canonical form by brute-force sorting of relabelled atom lists.
    fn canon(s: &Structure) -> Vec<(String, Vec<Elem>)> {
        permutations(s.len())
            .into_iter()
            .map(|p| {
                let mut atoms: Vec<(String, Vec<Elem>)> =
                    s.atoms().map(|(r, t)| (r.to_string(), t.iter().map(|&e| p[e]).collect())).collect();
                atoms.sort();
                atoms
            })
            .min()
            .unwrap()
    }

    #[test]
    fn size_one_has_two_structures() {
        let all: Vec<Structure> = enumerate_structures(&e2(), 1).unwrap().collect();
        assert_eq!(all.len(), 2);
        assert_eq!(all[0].atom_count(), 0);
        assert!(all[1].holds("E", &[0, 0]));
    }

    #[test]
    fn size_two_up_to_isomorphism() {
        // Burnside: (16 + 4) / 2
        assert_eq!(count_structures(&e2(), 2, true).unwrap(), 10);
        let classes: BTreeSet<_> = StructureEnumerator::raw(&e2(), 2)
            .unwrap()
            .filter(|s| s.len() == 2)
            .map(|s| canon(&s))
            .collect();
        assert_eq!(classes.len(), 10);
    }

    #[test]
    fn raw_count_up_to_two() {
        assert_eq!(StructureEnumerator::raw(&e2(), 2).unwrap().count(), 16 + 2);
        assert_eq!(enumerate_structures(&e2(), 2).unwrap().count(), 2 + 10);
    }

    #[test]
    fn iso_reduction_matches_brute_force_on_three_elements() {
        let sig = Signature::new().with("E", 2).with("P", 1);
        let reduced: Vec<_> = enumerate_structures(&sig, 3).unwrap().filter(|s| s.len() == 3).map(|s| canon(&s)).collect();
        let distinct: BTreeSet<_> = reduced.iter().cloned().collect();
        assert_eq!(reduced.len(), distinct.len());
        let all: BTreeSet<_> = StructureEnumerator::raw(&sig, 3).unwrap().filter(|s| s.len() == 3).map(|s| canon(&s)).collect();
        assert_eq!(distinct, all);
    }

    #[test]
    fn deterministic_order() {
        let a: Vec<_> = enumerate_structures(&e2(), 3).unwrap().collect();
        let b: Vec<_> = enumerate_structures(&e2(), 3).unwrap().collect();
        assert_eq!(a, b);
    }
}
