use serde::{Deserialize, Serialize};

use crate::error::{QfemError, Result};

/// Whether a control fires on |1⟩ (closed) or |0⟩ (open).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Open,
    Closed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Control {
    pub qubit: usize,
    pub polarity: Polarity,
}

impl Control {
    pub fn closed(qubit: usize) -> Self {
        Self { qubit, polarity: Polarity::Closed }
    }

    pub fn open(qubit: usize) -> Self {
        Self { qubit, polarity: Polarity::Open }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "angle")]
pub enum GateKind {
    X,
    Z,
    H,
    /// Rotation `cos(θ/2) I - i sin(θ/2) Y`, angle in radians.
    Ry(f64),
    Swap,
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::Swap => 2,
            _ => 1,
        }
    }

    pub fn inverse(&self) -> GateKind {
        match *self {
            GateKind::Ry(theta) => GateKind::Ry(-theta),
            other => other,
        }
    }
}

/// A single- or two-target gate with an arbitrary set of open/closed controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub controls: Vec<Control>,
}

impl Gate {
    pub fn new(kind: GateKind, targets: Vec<usize>, controls: Vec<Control>) -> Self {
        Self { kind, targets, controls }
    }

    pub fn x(target: usize) -> Self {
        Self::new(GateKind::X, vec![target], Vec::new())
    }

    pub fn z(target: usize) -> Self {
        Self::new(GateKind::Z, vec![target], Vec::new())
    }

    pub fn h(target: usize) -> Self {
        Self::new(GateKind::H, vec![target], Vec::new())
    }

    pub fn ry(target: usize, theta: f64) -> Self {
        Self::new(GateKind::Ry(theta), vec![target], Vec::new())
    }

    pub fn swap(a: usize, b: usize) -> Self {
        Self::new(GateKind::Swap, vec![a, b], Vec::new())
    }

    pub fn cx(control: usize, target: usize) -> Self {
        Self::x(target).with_control(Control::closed(control))
    }

    pub fn cz(control: usize, target: usize) -> Self {
        Self::z(target).with_control(Control::closed(control))
    }

    pub fn with_control(mut self, control: Control) -> Self {
        self.controls.push(control);
        self
    }

    pub fn with_controls(mut self, controls: impl IntoIterator<Item = Control>) -> Self {
        self.controls.extend(controls);
        self
    }

    pub fn inverse(&self) -> Gate {
        Gate { kind: self.kind.inverse(), targets: self.targets.clone(), controls: self.controls.clone() }
    }

    /// Largest qubit index the gate touches.
    pub fn max_qubit(&self) -> usize {
        self.targets.iter().copied().chain(self.controls.iter().map(|c| c.qubit)).max().unwrap_or(0)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.targets.len() != self.kind.arity() {
            return Err(QfemError::InvalidGate(format!(
                "{:?} needs {} target(s), got {}",
                self.kind,
                self.kind.arity(),
                self.targets.len()
            )));
        }
        if let GateKind::Ry(theta) = self.kind {
            if !theta.is_finite() {
                return Err(QfemError::InvalidGate(format!("non-finite Ry angle {theta}")));
            }
        }
        let mut seen = 0usize;
        for q in self.targets.iter().copied().chain(self.controls.iter().map(|c| c.qubit)) {
            if q >= n {
                return Err(QfemError::QubitOutOfRange { index: q, n });
            }
            if seen & (1 << q) != 0 {
                return Err(QfemError::InvalidGate(format!("qubit {q} used more than once")));
            }
            seen |= 1 << q;
        }
        Ok(())
    }

    /// (mask, value) pair selecting basis indices on which every control fires.
    pub(crate) fn control_mask(&self) -> (usize, usize) {
        self.controls.iter().fold((0, 0), |(mask, value), c| {
            let bit = 1 << c.qubit;
            match c.polarity {
                Polarity::Closed => (mask | bit, value | bit),
                Polarity::Open => (mask | bit, value),
            }
        })
    }
}
