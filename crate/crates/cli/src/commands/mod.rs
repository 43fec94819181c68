pub mod bounds;
pub mod calibrate;
pub mod metrics;
pub mod roc;
pub mod validate;
