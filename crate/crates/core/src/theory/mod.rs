//! The reusable mathematics (theorems) and the standard components
//! (Integer_Template, Preemptable_Queue_Template, Stack_Template) that user
//! code is verified against.

mod theorem;

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

pub use theorem::{parse_theory, Theorem};

use crate::lang::{check_module, parse, Diagnostic, TypedModule};

pub const STRING_THEORY: (&str, &str) = ("String_Theory", include_str!("../../library/string_theory.thy"));
pub const INTEGER_THEORY: (&str, &str) = ("Integer_Theory", include_str!("../../library/integer_theory.thy"));

/// Built-in component sources in dependency order.
pub const COMPONENT_SOURCES: [&str; 3] = [
    include_str!("../../library/integer_template.rsl"),
    include_str!("../../library/preemptable_queue_template.rsl"),
    include_str!("../../library/stack_template.rsl"),
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Theory {
    pub name: String,
    pub theorems: Vec<Theorem>,
    pub source: String,
}

/// A problem loading a library file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoadError {
    pub origin: String,
    pub diagnostics: Vec<Diagnostic>,
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.diagnostics.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}:{d}", self.origin)?;
        }
        Ok(())
    }
}

impl std::error::Error for LoadError {}

/// Theories plus checked standard components. Immutable once built and
/// shared by every verification.
#[derive(Clone, Debug, Default)]
pub struct Library {
    theories: Vec<Theory>,
    components: Vec<TypedModule>,
}

fn builtin(origin: &str, src: &str) -> Vec<Theorem> {
    parse_theory(src).unwrap_or_else(|d| {
        panic!(
            "{}",
            LoadError {
                origin: origin.into(),
                diagnostics: d
            }
        )
    })
}

pub fn builtin_string_theory() -> Vec<Theorem> {
    builtin(STRING_THEORY.0, STRING_THEORY.1)
}

pub fn builtin_integer_facts() -> Vec<Theorem> {
    builtin(INTEGER_THEORY.0, INTEGER_THEORY.1)
}

/// The checked standard components, in dependency order.
pub fn standard_components() -> Vec<TypedModule> {
    Library::standard().components
}

impl Library {
    /// A library with no theories and no components.
    pub fn empty() -> Library {
        Library::default()
    }

    /// Built-in theories and standard components.
    pub fn standard() -> Library {
        let mut lib = Library::empty();
        for (name, src) in [STRING_THEORY, INTEGER_THEORY] {
            lib.add_theory(name, src)
                .unwrap_or_else(|e| panic!("built-in theory: {e}"));
        }
        for src in COMPONENT_SOURCES {
            lib.add_component(src)
                .unwrap_or_else(|e| panic!("built-in component: {e}"));
        }
        lib
    }

    /// Process-wide copy of [`Library::standard`].
    pub fn shared() -> &'static Library {
        static LIB: OnceLock<Library> = OnceLock::new();
        LIB.get_or_init(Library::standard)
    }

    /// Adds the theorems of `src` to theory `name`, creating it if needed.
    pub fn add_theory(&mut self, name: &str, src: &str) -> Result<(), LoadError> {
        let theorems = parse_theory(src).map_err(|d| LoadError {
            origin: name.to_string(),
            diagnostics: d,
        })?;
        for t in &theorems {
            if self.theorems().any(|o| o.name == t.name) {
                return Err(LoadError {
                    origin: name.to_string(),
                    diagnostics: vec![Diagnostic::error(
                        format!("theorem `{}` is already defined", t.name),
                        t.line,
                        1,
                    )],
                });
            }
        }
        match self.theories.iter_mut().find(|t| t.name == name) {
            Some(th) => {
                th.theorems.extend(theorems);
                th.source.push('\n');
                th.source.push_str(src);
            }
            None => self.theories.push(Theory {
                name: name.to_string(),
                theorems,
                source: src.to_string(),
            }),
        }
        Ok(())
    }

    /// Loads every `*.thy` file of `dir`, in file-name order; the file stem
    /// names the theory.
    pub fn load_theory_dir(&mut self, dir: &Path) -> Result<(), LoadError> {
        let io_err = |p: &Path, e: std::io::Error| LoadError {
            origin: p.display().to_string(),
            diagnostics: vec![Diagnostic::error(e.to_string(), 1, 1)],
        };
        let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(|e| io_err(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "thy"))
            .collect();
        files.sort();
        for f in files {
            let src = std::fs::read_to_string(&f).map_err(|e| io_err(&f, e))?;
            let stem = f.file_stem().unwrap_or_default().to_string_lossy().to_string();
            self.add_theory(&stem, &src).map_err(|mut e| {
                e.origin = f.display().to_string();
                e
            })?;
        }
        Ok(())
    }

    /// Parses and checks a concept against the components already loaded.
    pub fn add_component(&mut self, src: &str) -> Result<(), LoadError> {
        let fail = |origin: &str, d| LoadError {
            origin: origin.to_string(),
            diagnostics: d,
        };
        let m = parse(src).map_err(|d| fail("<component>", d))?;
        let name = m.name.name.clone();
        let typed = check_module(&m, self).map_err(|d| fail(&name, d))?;
        self.components.retain(|c| c.name() != name);
        self.components.push(typed);
        Ok(())
    }

    pub fn component(&self, name: &str) -> Option<&TypedModule> {
        self.components.iter().find(|c| c.name() == name)
    }

    pub fn components(&self) -> &[TypedModule] {
        &self.components
    }

    pub fn theories(&self) -> &[Theory] {
        &self.theories
    }

    pub fn has_theory(&self, name: &str) -> bool {
        self.theories.iter().any(|t| t.name == name)
    }

    pub fn theorems(&self) -> impl Iterator<Item = &Theorem> {
        self.theories.iter().flat_map(|t| t.theorems.iter())
    }

    pub fn theorem(&self, name: &str) -> Option<&Theorem> {
        self.theorems().find(|t| t.name == name)
    }
}
