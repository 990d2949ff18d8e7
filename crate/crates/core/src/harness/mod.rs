//! Configuration, synthetic phantoms, replicated experiments and their
//! CSV/PGM outputs.

mod config;
mod experiment;
mod pgm;
mod phantom;

pub use config::{DataSource, ExperimentConfig, Method, MethodParams, SweepGrid};
pub use experiment::{
    evaluate_label_files, load_dataset, replicate_seed, run_experiment, run_sweep, sweep_csv, ExperimentResult,
    FiveNumber, ReplicateRecord, SolverSetup, SweepPoint, METRICS_HEADER, SUMMARY_HEADER, SWEEP_HEADER,
};
pub use pgm::{decode_label_map, emit_label_map, gray_level, label_map_text, label_of_gray, read_pgm, GrayImage, MASK_GRAY};
pub use phantom::{class_signatures, generate_phantom, Dataset, Layout, PhantomSpec};
