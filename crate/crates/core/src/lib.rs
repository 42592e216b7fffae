pub mod classify;
pub mod corpus;
pub mod dataset;
pub mod lda;
pub mod preprocess;
pub mod report;
pub mod vis;
