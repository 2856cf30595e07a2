//! Context split `Γ = Γ1 ∘ Γ2`: unrestricted bindings go to both sides,
//! linear bindings and formulae to exactly one side, where they must be
//! well formed.
//!
//! A binding counts as unrestricted when its type is unrestricted up to
//! unfolding of `rec`.

use std::collections::BTreeSet;

use crate::syntax::{Context, Entry, Name};

pub(crate) fn is_shared(e: &Entry) -> bool {
    matches!(e, Entry::Binding(_, t) if t.is_unrestricted_unfolded())
}

fn dom_of(entries: &[Entry]) -> BTreeSet<Name> {
    entries
        .iter()
        .filter_map(|e| match e {
            Entry::Binding(x, _) => Some(x.clone()),
            Entry::Resource(_) => None,
        })
        .collect()
}

fn wf_after(prefix: &[Entry], e: &Entry) -> bool {
    let dom = dom_of(prefix);
    e.free_vars().iter().all(|x| dom.contains(x))
}

pub fn check_split(g: &Context, g1: &Context, g2: &Context) -> bool {
    split_from_end(&g.entries, &g1.entries, &g2.entries)
}

fn split_from_end(g: &[Entry], g1: &[Entry], g2: &[Entry]) -> bool {
    let Some((e, rest)) = g.split_last() else {
        return g1.is_empty() && g2.is_empty();
    };
    let init = |s: &[Entry]| s[..s.len() - 1].to_vec();
    if is_shared(e) {
        return g1.last() == Some(e)
            && g2.last() == Some(e)
            && split_from_end(rest, &init(g1), &init(g2));
    }
    let left = g1.last() == Some(e) && {
        let g1p = init(g1);
        wf_after(&g1p, e) && split_from_end(rest, &g1p, g2)
    };
    left || (g2.last() == Some(e) && {
        let g2p = init(g2);
        wf_after(&g2p, e) && split_from_end(rest, g1, &g2p)
    })
}

/// Every split of `g` allowed by the rules.
pub fn enumerate_splits(g: &Context) -> Vec<(Context, Context)> {
    let mut acc = vec![(Vec::new(), Vec::new())];
    for e in &g.entries {
        let mut next = Vec::with_capacity(acc.len() * 2);
        for (l, r) in acc {
            if is_shared(e) {
                let mut l = l;
                let mut r = r;
                l.push(e.clone());
                r.push(e.clone());
                next.push((l, r));
                continue;
            }
            if wf_after(&l, e) {
                let mut l2 = l.clone();
                l2.push(e.clone());
                next.push((l2, r.clone()));
            }
            if wf_after(&r, e) {
                let mut r2 = r;
                r2.push(e.clone());
                next.push((l, r2));
            }
        }
        acc = next;
    }
    acc.into_iter()
        .map(|(l, r)| (Context::from_entries(l), Context::from_entries(r)))
        .collect()
}
