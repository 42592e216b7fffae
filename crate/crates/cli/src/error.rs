use parlascope::classify::ClassifyError;
use parlascope::dataset::DatasetError;
use parlascope::lda::LdaError;
use parlascope::preprocess::PreprocessError;
use parlascope::report::ReportError;
use parlascope::vis::VisError;
use thiserror::Error;

pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

/// Invalid parameters or missing inputs detected before or during a run.
#[derive(Debug, Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn is_validation(cause: &(dyn std::error::Error + 'static)) -> bool {
    if cause.is::<ConfigError>() {
        return true;
    }
    if let Some(e) = cause.downcast_ref::<DatasetError>() {
        return matches!(
            e,
            DatasetError::InsufficientPopulation { .. }
                | DatasetError::NonPositiveSampleSize
                | DatasetError::NotAMetadataTask(_)
                | DatasetError::MissingWingMap(_)
                | DatasetError::TrainFraction(_)
                | DatasetError::Stratification { .. }
                | DatasetError::EmptyMerge
                | DatasetError::EmptyDataset
        );
    }
    if let Some(e) = cause.downcast_ref::<LdaError>() {
        return matches!(e, LdaError::Config(_) | LdaError::TooManyTopics { .. } | LdaError::EmptyMatrix);
    }
    if let Some(e) = cause.downcast_ref::<PreprocessError>() {
        return matches!(e, PreprocessError::EmptyKeepSet | PreprocessError::InvalidMinCount);
    }
    if let Some(e) = cause.downcast_ref::<VisError>() {
        return matches!(e, VisError::Lambda(_) | VisError::TopN | VisError::VocabularyMismatch { .. });
    }
    if let Some(e) = cause.downcast_ref::<ReportError>() {
        return matches!(e, ReportError::Thresholds(..) | ReportError::Bins(_) | ReportError::ZeroK | ReportError::Empty);
    }
    if let Some(e) = cause.downcast_ref::<ClassifyError>() {
        return matches!(e, ClassifyError::SingleClass(_));
    }
    false
}

pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.chain().any(is_validation) {
        EXIT_CONFIG
    } else {
        EXIT_RUNTIME
    }
}
