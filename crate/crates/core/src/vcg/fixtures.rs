use super::{CopulaVertex, VarSet, VineStructure};

fn set(xs: &[usize]) -> VarSet {
    xs.iter().collect()
}

/// The five-dimensional reference vine used throughout the tests and docs.
///
/// Level 0: `{0,2} {1,2} {2,4} {3,4}`; level 1: `{0,4;2} {1,4;2} {2,3;4}`;
/// level 2: `{0,3;2,4} {1,3;2,4}`; level 3: `{0,1;2,3,4}`.
pub fn fig1a() -> VineStructure {
    let v = |l, r, c: &[usize]| CopulaVertex::new(l, r, set(c));
    VineStructure::new(
        5,
        vec![
            v(0, 2, &[]),
            v(1, 2, &[]),
            v(2, 4, &[]),
            v(3, 4, &[]),
            v(0, 4, &[2]),
            v(1, 4, &[2]),
            v(2, 3, &[4]),
            v(0, 3, &[2, 4]),
            v(1, 3, &[2, 4]),
            v(0, 1, &[2, 3, 4]),
        ],
    )
    .expect("reference vine is valid")
}

/// Three-dimensional path vine `{0,1} {1,2} {0,2;1}`.
pub fn appendix_path3() -> VineStructure {
    VineStructure::dvine(&[0, 1, 2]).expect("path vine is valid")
}
