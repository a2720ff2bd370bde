use thiserror::Error;

/// Errors reported by fallible operations in this crate.
///
/// Operations whose documented preconditions are violated (for example an
/// `eps` outside its stated range) panic instead; errors are reserved for
/// conditions that depend on runtime data.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("time series must contain at least one value")]
    EmptySeries,

    #[error("time series values must be finite, found {value}")]
    NonFiniteValue { value: f64 },

    #[error("rank {rank} outside alphabet 1..={alphabet_size}")]
    RankOutOfRange { rank: usize, alphabet_size: usize },

    #[error("rank sequence must contain at least one rank")]
    EmptyRankSequence,

    #[error("expected {expected} substitution values, got {found}")]
    AlphabetSizeMismatch { expected: usize, found: usize },

    #[error("substitution values must be strictly increasing")]
    ValuesNotIncreasing,

    #[error("traversal must contain at least one index pair")]
    EmptyTraversal,

    #[error("traversal must start at (0, 0), found ({fi}, {fj})", fi = .found.0, fj = .found.1)]
    TraversalStart { found: (usize, usize) },

    #[error(
        "invalid traversal step from ({ai}, {aj}) to ({bi}, {bj})",
        ai = .from.0, aj = .from.1, bi = .to.0, bj = .to.1
    )]
    TraversalStep {
        from: (usize, usize),
        to: (usize, usize),
    },

    #[error(
        "traversal ends at ({fi}, {fj}), expected ({ei}, {ej})",
        fi = .found.0, fj = .found.1, ei = .expected.0, ej = .expected.1
    )]
    TraversalShape {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("{count} traversals exceed the cap of {cap}")]
    TraversalCapExceeded { count: u128, cap: u64 },

    #[error("profile must contain at least one entry")]
    EmptyProfile,

    #[error("profile entry has min {min} greater than max {max}")]
    ProfileEntryOrder { min: f64, max: f64 },

    #[error("profile rank pair ({min}, {max}) is not ordered or not 1-based")]
    RankPairOrder { min: usize, max: usize },

    #[error("profile value {value} does not occur in the series")]
    ValueNotInSeries { value: f64 },

    #[error("centers must contain at least one series")]
    EmptyCenters,

    #[error("need at least {need} facilities, got {have}")]
    NotEnoughFacilities { have: usize, need: usize },

    #[error(
        "exhaustive solve exceeds the cap of {cap}: {combinations} center subsets, \
         {partitions} assignment partitions"
    )]
    SolveCapExceeded {
        combinations: u128,
        partitions: u128,
        cap: u64,
    },
}
