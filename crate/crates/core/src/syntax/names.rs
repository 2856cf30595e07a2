use std::collections::BTreeSet;

use super::value::Name;

/// A name derived from `base` that does not occur in `avoid`.
///
/// Deterministic: the same inputs always yield the same name, so renamed
/// terms print identically across runs.
pub fn fresh(base: &str, avoid: &BTreeSet<Name>) -> Name {
    let stem = match base.find('\'') {
        Some(i) if i > 0 => &base[..i],
        _ => base,
    };
    (1u64..)
        .map(|k| format!("{stem}'{k}"))
        .find(|c| !avoid.contains(c))
        .expect("unbounded supply of names")
}

/// Canonical binder names used by alpha-normalization. They are not valid
/// surface identifiers, so they never clash with user names.
pub(crate) fn canonical(k: usize) -> Name {
    format!("#{k}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_skips_taken_names() {
        let avoid: BTreeSet<Name> = ["x", "x'1", "x'2"].iter().map(|s| s.to_string()).collect();
        assert_eq!(fresh("x", &avoid), "x'3");
        assert_eq!(fresh("x'1", &avoid), "x'3");
        assert_eq!(fresh("y", &avoid), "y'1");
    }
}
