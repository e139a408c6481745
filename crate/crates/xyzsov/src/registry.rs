//! Name-keyed registry of trait-object strategies.

use crate::error::{Error, Result};

pub trait Named {
    fn name(&self) -> &'static str;
}

pub struct Registry<T: ?Sized + Named> {
    kind: &'static str,
    entries: Vec<Box<T>>,
}

impl<T: ?Sized + Named> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            entries: Vec::new(),
        }
    }

    /// Adds a strategy; a later registration under an existing name replaces it.
    pub fn register(&mut self, entry: Box<T>) -> &mut Self {
        if let Some(pos) = self.entries.iter().position(|e| e.name() == entry.name()) {
            self.entries[pos] = entry;
        } else {
            self.entries.push(entry);
        }
        self
    }

    pub fn get(&self, name: &str) -> Result<&T> {
        self.entries
            .iter()
            .find(|e| e.name() == name)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::Unknown {
                kind: self.kind,
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.entries.iter().map(|b| b.as_ref())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    trait Greeter: Named {
        fn greet(&self) -> String;
    }
    struct A;
    struct B(&'static str);
    impl Named for A {
        fn name(&self) -> &'static str {
            "a"
        }
    }
    impl Greeter for A {
        fn greet(&self) -> String {
            "from a".into()
        }
    }
    impl Named for B {
        fn name(&self) -> &'static str {
            "b"
        }
    }
    impl Greeter for B {
        fn greet(&self) -> String {
            self.0.into()
        }
    }

    #[test]
    fn lookup_and_replace() {
        let mut r: Registry<dyn Greeter> = Registry::new("greeter");
        r.register(Box::new(A)).register(Box::new(B("one")));
        assert_eq!(r.get("b").unwrap().greet(), "one");
        r.register(Box::new(B("two")));
        assert_eq!(r.len(), 2);
        assert_eq!(r.get("b").unwrap().greet(), "two");
        let err = r.get("c").err().unwrap().to_string();
        assert!(err.contains("a, b"), "{err}");
    }
}
