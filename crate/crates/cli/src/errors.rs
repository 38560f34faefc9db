use std::fmt;

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;
pub const EXIT_IO: u8 = 4;
const EXIT_OTHER: u8 = 1;

/// Bad arguments or inputs detected by the CLI itself.
#[derive(Debug)]
pub struct Invalid(pub String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

/// A check that ran to completion but failed numerically.
#[derive(Debug)]
pub struct NumericFailure(pub String);

impl fmt::Display for NumericFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for NumericFailure {}

pub fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Invalid(msg.into()).into()
}

fn library_code(e: &resnet_tw::Error) -> u8 {
    use resnet_tw::Error as E;
    match e {
        E::InvalidArgument(_) | E::InvariantViolation(_) | E::Parse { .. } | E::Json(_) => {
            EXIT_VALIDATION
        }
        E::DegenerateWarp(_) | E::Numeric(_) => EXIT_NUMERIC,
        E::Io(_) => EXIT_IO,
    }
}

/// Maps the first recognised cause in the chain to an exit code.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<resnet_tw::Error>() {
            return library_code(e);
        }
        if cause.is::<Invalid>() || cause.is::<clap::Error>() || cause.is::<serde_json::Error>() {
            return EXIT_VALIDATION;
        }
        if cause.is::<NumericFailure>() {
            return EXIT_NUMERIC;
        }
        if cause.is::<std::io::Error>() {
            return EXIT_IO;
        }
    }
    EXIT_OTHER
}
