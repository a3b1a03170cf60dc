//! Parsing of densities, rotations, configurations and surfaces from
//! command-line values.

use std::path::Path;

use dispersia::io::{parse_json, read_density, read_json};
use dispersia::pathopt::fixtures;
use dispersia::{ChargeDensity, Configuration, EnergySurface, Error, PathOnConfigSpace, Result, Rotation};

pub const FIXTURES: [&str; 4] = ["dipole", "quadrupole", "octopole", "planar-octopole"];

/// `fixture:<name>` or a JSON/CSV file.
pub fn density(arg: &str) -> Result<ChargeDensity> {
    match arg.strip_prefix("fixture:") {
        Some("dipole") => Ok(fixtures::unit_dipole()),
        Some("quadrupole") => Ok(fixtures::linear_quadrupole()),
        Some("octopole") => Ok(fixtures::linear_octopole()),
        Some("planar-octopole") => Ok(fixtures::planar_octopole()),
        Some(other) => Err(Error::Validation(format!(
            "unknown fixture {other:?}, expected one of {}",
            FIXTURES.join(", ")
        ))),
        None => read_density(Path::new(arg)),
    }
}

/// Four numbers are a quaternion `w,x,y,z`, nine a row-major matrix.
pub fn rotation(values: &[f64]) -> Result<Rotation> {
    match values.len() {
        0 => Ok(Rotation::identity()),
        4 => Rotation::from_quaternion([values[0], values[1], values[2], values[3]]),
        9 => Rotation::from_row_major(values),
        k => Err(Error::Validation(format!("a rotation needs 4 or 9 numbers, got {k}"))),
    }
}

/// Inline JSON object or a path to one.
pub fn configuration(arg: &str) -> Result<Configuration> {
    if arg.trim_start().starts_with('{') {
        parse_json(arg, "<inline configuration>")
    } else {
        read_json(Path::new(arg))
    }
}

pub fn surface(path: &Path) -> Result<EnergySurface> {
    read_json(path)
}

pub fn path(path: &Path) -> Result<PathOnConfigSpace> {
    read_json(path)
}
