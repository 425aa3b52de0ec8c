//! Shared fixtures for the benchmarks: fixed parameter sets, certified codes
//! and encoded shares, so every bench measures only the operation itself.

use baer_core::certify::find_certified_field;
use baer_core::encoder::encode_message;
use baer_core::{Code, CodeParams, NodeShare, Scheme, SourceMessage};

/// A ready-to-use code with its encoded shares.
pub struct Fixture {
    pub name: &'static str,
    pub scheme: Scheme,
    pub code: Code,
    pub message: SourceMessage,
    pub shares: Vec<NodeShare>,
}

impl Fixture {
    /// Builds over the smallest prime certified for `scheme`.
    pub fn new(name: &'static str, params: CodeParams, scheme: Scheme) -> Self {
        let (code, _) = find_certified_field(&params, scheme, 2, 1_000_000)
            .unwrap_or_else(|e| panic!("{name}: {e}"));
        let f = code.field();
        let message = SourceMessage(
            (0..code.derived().f_mbr as u64)
                .map(|i| f.elem(i.wrapping_mul(2_654_435_761) ^ 0x9e37))
                .collect(),
        );
        let shares = encode_message(&message, &code).expect("encodes");
        Fixture {
            name,
            scheme,
            code,
            message,
            shares,
        }
    }

    /// The `d` lowest-indexed shares other than `failed`.
    pub fn helpers(&self, failed: usize, d: usize) -> Vec<&NodeShare> {
        self.shares
            .iter()
            .filter(|s| s.node != failed)
            .take(d)
            .collect()
    }
}

/// Small error-resilient set for the large-field scheme.
pub fn scheme_one() -> Fixture {
    Fixture::new(
        "n6-k3-b1-a6",
        CodeParams::new(6, 3, &[4, 5], 1, 6),
        Scheme::One,
    )
}

/// Larger error-resilient set for the large-field scheme.
pub fn scheme_one_large() -> Fixture {
    Fixture::new(
        "n9-k5-b1-a30",
        CodeParams::new(9, 5, &[7, 8], 1, 30),
        Scheme::One,
    )
}

/// Multi-iteration set for the small-field scheme.
pub fn scheme_two() -> Fixture {
    Fixture::new(
        "n6-k3-b1-a12",
        CodeParams::new(6, 3, &[4, 5], 1, 12),
        Scheme::Two,
    )
}

/// Error-free set for the concatenation scheme.
pub fn concat() -> Fixture {
    Fixture::new(
        "n5-k2-b0-a12",
        CodeParams::new(5, 2, &[3, 4], 0, 12),
        Scheme::Concat,
    )
}
