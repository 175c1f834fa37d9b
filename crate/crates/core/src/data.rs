//! Bundled data files. Setting `RISKBENCH_DATA` to a directory makes every
//! loader read from there instead of the copies compiled into the binary.

use std::path::PathBuf;

use crate::error::{Error, Result};

pub const DATA_ENV: &str = "RISKBENCH_DATA";

pub const RBS_FILE: &str = "rbs.json";
pub const CATEGORIES_FILE: &str = "categories_wsdot.json";
pub const STOPWORDS_FILE: &str = "stopwords_en.txt";

const RBS_JSON: &str = include_str!("../../../data/rbs.json");
const CATEGORIES_JSON: &str = include_str!("../../../data/categories_wsdot.json");
const STOPWORDS_TXT: &str = include_str!("../../../data/stopwords_en.txt");

/// The override directory, if `RISKBENCH_DATA` is set and non-empty.
pub fn override_dir() -> Option<PathBuf> {
    std::env::var_os(DATA_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
}

/// Contents of a bundled file, read from the override directory when set.
pub fn bundled(name: &str) -> Result<String> {
    if let Some(dir) = override_dir() {
        let path = dir.join(name);
        return std::fs::read_to_string(&path).map_err(|e| Error::io(path, e));
    }
    match name {
        RBS_FILE => Ok(RBS_JSON.to_string()),
        CATEGORIES_FILE => Ok(CATEGORIES_JSON.to_string()),
        STOPWORDS_FILE => Ok(STOPWORDS_TXT.to_string()),
        other => Err(Error::Config(format!("no bundled data file `{other}`"))),
    }
}
