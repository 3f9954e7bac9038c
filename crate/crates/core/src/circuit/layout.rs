use std::fmt;

use serde::Serialize;

use super::{CircuitError, Qubit};

/// A named, contiguous block of qubits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Register {
    name: String,
    start: u32,
    len: u32,
}

impl Register {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn start(&self) -> u32 {
        self.start
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn qubit(&self, i: usize) -> Qubit {
        assert!(
            i < self.len(),
            "{}[{i}] out of range (len {})",
            self.name,
            self.len
        );
        Qubit(self.start + i as u32)
    }

    pub fn qubits(&self) -> impl Iterator<Item = Qubit> + '_ {
        (self.start..self.start + self.len).map(Qubit)
    }

    pub fn contains(&self, q: Qubit) -> bool {
        (self.start..self.start + self.len).contains(&q.0)
    }
}

/// Register map of a circuit. Registers are laid out back to back in the order
/// they are added, so qubit ids are dense in `0..num_qubits()`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct QubitLayout {
    registers: Vec<Register>,
}

impl QubitLayout {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: &str, len: usize) -> Result<&Register, CircuitError> {
        if !is_identifier(name) {
            return Err(CircuitError::BadRegisterName(name.to_string()));
        }
        if self.register(name).is_some() {
            return Err(CircuitError::DuplicateRegister(name.to_string()));
        }
        let start = self.num_qubits() as u32;
        self.registers.push(Register {
            name: name.to_string(),
            start,
            len: len as u32,
        });
        Ok(self.registers.last().unwrap())
    }

    /// Builder-style [`add`](Self::add) for names known to be valid.
    pub fn with(mut self, name: &str, len: usize) -> Self {
        self.add(name, len).expect("valid register");
        self
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn register(&self, name: &str) -> Option<&Register> {
        self.registers.iter().find(|r| r.name == name)
    }

    pub fn get(&self, name: &str) -> Result<&Register, CircuitError> {
        self.register(name)
            .ok_or_else(|| CircuitError::UnknownRegister(name.to_string()))
    }

    /// `name[i]`, or an error if either part does not resolve.
    pub fn qubit(&self, name: &str, i: usize) -> Result<Qubit, CircuitError> {
        let reg = self.get(name)?;
        if i >= reg.len() {
            return Err(CircuitError::IndexOutOfRange {
                register: name.to_string(),
                index: i,
                len: reg.len(),
            });
        }
        Ok(reg.qubit(i))
    }

    pub fn num_qubits(&self) -> usize {
        self.registers.iter().map(Register::len).sum()
    }

    /// Register and offset holding qubit `q`.
    pub fn resolve(&self, q: Qubit) -> Option<(&Register, usize)> {
        self.registers
            .iter()
            .find(|r| r.contains(q))
            .map(|r| (r, (q.0 - r.start) as usize))
    }

    pub fn label(&self, q: Qubit) -> QubitLabel<'_> {
        QubitLabel { layout: self, q }
    }
}

/// Displays a qubit as `name[i]`.
pub struct QubitLabel<'a> {
    layout: &'a QubitLayout,
    q: Qubit,
}

impl fmt::Display for QubitLabel<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.layout.resolve(self.q) {
            Some((r, i)) => write!(f, "{}[{i}]", r.name),
            None => write!(f, "?[{}]", self.q.0),
        }
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registers_are_contiguous_and_disjoint() {
        let layout = QubitLayout::new()
            .with("address", 3)
            .with("select", 8)
            .with("out", 1);
        assert_eq!(layout.num_qubits(), 12);
        assert_eq!(layout.qubit("select", 0).unwrap(), Qubit(3));
        assert_eq!(layout.qubit("out", 0).unwrap(), Qubit(11));
        let (r, i) = layout.resolve(Qubit(5)).unwrap();
        assert_eq!((r.name(), i), ("select", 2));
        assert!(layout.resolve(Qubit(12)).is_none());
        assert_eq!(layout.label(Qubit(0)).to_string(), "address[0]");
    }

    #[test]
    fn bad_registers() {
        let mut layout = QubitLayout::new().with("a", 2);
        assert!(matches!(
            layout.add("a", 1),
            Err(CircuitError::DuplicateRegister(_))
        ));
        assert!(matches!(
            layout.add("1x", 1),
            Err(CircuitError::BadRegisterName(_))
        ));
        assert!(matches!(
            layout.qubit("a", 2),
            Err(CircuitError::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            layout.qubit("b", 0),
            Err(CircuitError::UnknownRegister(_))
        ));
    }

    #[test]
    fn empty_register_is_allowed() {
        let layout = QubitLayout::new().with("work", 0).with("out", 1);
        assert_eq!(layout.qubit("out", 0).unwrap(), Qubit(0));
        assert!(layout.get("work").unwrap().is_empty());
    }
}
