//! Reading structure, family and sentence files with located diagnostics.

use std::fs;
use std::path::{Path, PathBuf};

use partial_model::format::{
    parse_manifest, parse_sentences, parse_structure, sentence_lines, Manifest,
};
use partial_model::products::{FilterSet, IndexedFamily};
use partial_model::syntax::{infer_signature, Formula, Signature};
use partial_model::PartialStructure;
use thiserror::Error;

/// Anything wrong with the inputs. Every variant maps to exit code 3.
#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Located {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

pub fn invalid(path: &Path, message: impl ToString) -> LoadError {
    LoadError::Invalid {
        path: path.display().to_string(),
        message: message.to_string(),
    }
}

pub fn read(path: &Path) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn structure(path: &Path) -> Result<PartialStructure, LoadError> {
    parse_structure(&read(path)?).map_err(|e| LoadError::Located {
        path: path.display().to_string(),
        line: e.line,
        message: e.message,
    })
}

/// A family manifest with its members loaded.
pub struct LoadedFamily {
    pub path: PathBuf,
    pub manifest: Manifest,
    pub family: IndexedFamily,
}

impl LoadedFamily {
    /// The named manifest filter, or `{I}` for `trivial`.
    pub fn filter(&self, name: &str) -> Result<FilterSet, LoadError> {
        let ground = self.family.index().to_vec();
        if name == "trivial" {
            return FilterSet::trivial(ground).map_err(|e| invalid(&self.path, e));
        }
        let spec = self
            .manifest
            .filters
            .iter()
            .find(|f| f.name == name)
            .ok_or_else(|| invalid(&self.path, format!("no filter named `{name}`")))?;
        let members: Vec<Vec<&str>> = spec
            .members
            .iter()
            .map(|g| g.iter().map(String::as_str).collect())
            .collect();
        FilterSet::from_names(ground, &members)
            .map_err(|e| invalid(&self.path, format!("filter `{name}`: {e}")))
    }

    /// The principal ultrafilter at the named index.
    pub fn principal(&self, index: &str) -> Result<FilterSet, LoadError> {
        let i0 = self
            .family
            .index()
            .iter()
            .position(|n| n == index)
            .ok_or_else(|| invalid(&self.path, format!("no index named `{index}`")))?;
        FilterSet::principal(self.family.index().to_vec(), i0).map_err(|e| invalid(&self.path, e))
    }

    /// Every filter and ultrafilter line of the manifest, checked.
    pub fn check_filters(&self) -> Result<(), LoadError> {
        for spec in &self.manifest.filters {
            let f = self.filter(&spec.name)?;
            if let Some(why) = f.filter_violation() {
                return Err(invalid(
                    &self.path,
                    format!("filter `{}` is not a filter: {why}", spec.name),
                ));
            }
        }
        if let Some(p) = &self.manifest.principal {
            self.principal(p)?;
        }
        Ok(())
    }
}

pub fn family(path: &Path) -> Result<LoadedFamily, LoadError> {
    let manifest = parse_manifest(&read(path)?).map_err(|e| LoadError::Located {
        path: path.display().to_string(),
        line: e.line,
        message: e.message,
    })?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut members = Vec::with_capacity(manifest.members.len());
    for (name, rel) in &manifest.members {
        members.push((name.clone(), structure(&dir.join(rel))?));
    }
    let family = IndexedFamily::new(members).map_err(|e| invalid(path, e))?;
    Ok(LoadedFamily {
        path: path.to_path_buf(),
        manifest,
        family,
    })
}

/// The signature given on the command line, or the one the texts use.
pub fn signature<'a>(
    given: Option<&str>,
    texts: impl IntoIterator<Item = &'a str>,
) -> Result<Signature, LoadError> {
    match given {
        Some(s) => partial_model::format::parse_signature(s).map_err(|e| LoadError::Invalid {
            path: "--sig".into(),
            message: e.message,
        }),
        None => infer_signature(texts).map_err(|e| LoadError::Invalid {
            path: "sentences".into(),
            message: e.to_string(),
        }),
    }
}

/// A sentence file parsed against `sig`, or against the signature its own
/// lines use when `sig` is `None`.
pub fn sentences(
    path: &Path,
    sig: Option<&Signature>,
) -> Result<(Vec<Formula>, Signature), LoadError> {
    let text = read(path)?;
    let sig = match sig {
        Some(s) => s.clone(),
        None => {
            infer_signature(sentence_lines(&text).map(|(_, l)| l)).map_err(|e| invalid(path, e))?
        }
    };
    let gamma = parse_sentences(&text, &sig).map_err(|e| LoadError::Located {
        path: path.display().to_string(),
        line: e.line,
        message: e.message,
    })?;
    Ok((gamma, sig))
}
