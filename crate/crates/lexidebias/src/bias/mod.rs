//! Bias measurement: WEAT association statistics with permutation tests,
//! graph label-propagation bias scores (WAT), and gender-analogy
//! classification (SemBias).

pub mod sembias;
pub mod wat;
pub mod weat;

pub use sembias::{load_sembias, sembias_accuracy, sembias_classify, PairLabel, SemBiasInstance, SemBiasRates};
pub use wat::{
    load_graph, wat_bias_score, wat_correlation, wat_embedding_score, wat_propagate,
    AssociationGraph, GenderInfo, WatConfig,
};
pub use weat::{
    evaluate_weat, weat_association, weat_effect_size, weat_pvalue, weat_statistic, PvalueMethod,
    WeatResult, WeatSpec,
};
