pub mod advisories;
pub mod classify;
pub mod diff;
pub mod flow;
pub mod ingest;
pub mod lag;
pub mod mine;
pub mod report;
pub mod resolve;
pub mod serve;
