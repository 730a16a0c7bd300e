//! Dataset ingestion, the synthetic ring generator and Haar features.

mod csv_io;
pub mod haar;
pub mod pgm;
pub mod ring;

pub use csv_io::{load_csv, load_csv_raw, parse_csv, save_csv, write_csv, RawDataset};
pub use haar::{enumerate_haar, extract_haar, haar_features, HaarFeature, HaarKind, IntegralImage};
pub use pgm::{encode_pgm, load_manifest, load_pgm, parse_pgm, GrayImage, Manifest, ManifestEntry};
pub use ring::{generate_ring, generate_ring_negatives, NormalStream, RingSpec};
