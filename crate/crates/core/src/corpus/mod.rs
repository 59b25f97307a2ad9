//! Labelled process texts: data model, file format, vocabulary, splits and statistics.

pub mod convert;
pub mod io;
pub mod split;
pub mod stats;
pub mod tokenize;
pub mod toy;
pub mod types;
pub mod vocab;

pub use convert::{convert_dump, convert_file, LabelMapping, SentenceTarget};
pub use io::{load_corpus, parse_corpus, save_corpus, to_jsonl, LoadMode, LoadWarning};
pub use split::{kfold_indices, ratio_test_indices, split, split_kfold, split_ratio, Split, SplitMode, SplitSpec};
pub use stats::{corpus_stats, stats_table, CorpusStats};
pub use tokenize::tokenize;
pub use toy::toy_corpus;
pub use types::{Document, Domain, Sentence, SentenceSemantic, SentenceType, WordTag};
pub use vocab::{build_vocab, Vocab, OOV_TOKEN, PAD_TOKEN};
