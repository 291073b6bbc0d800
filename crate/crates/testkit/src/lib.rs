//! Fixtures shared by the echomap test suites. Nothing here calls into the
//! code paths it is used to check.

pub mod oracle;
pub mod scenes;
pub mod smf;
