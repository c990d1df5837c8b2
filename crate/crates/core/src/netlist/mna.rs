use num_traits::One;

use crate::polyalg::{Coeff, Exact, Polynomial, RationalFunction};

use super::{Circuit, NetlistError};

type Entry = Polynomial<Exact>;

fn ex(x: f64) -> Exact {
    Exact::from_f64(x)
}

/// Nodal admittance system `Y(s)·V = I` with exact polynomial entries.
#[derive(Clone, Debug, PartialEq)]
pub struct MnaSystem {
    labels: Vec<&'static str>,
    y: Vec<Vec<Entry>>,
    input: usize,
}

impl MnaSystem {
    /// Empty system; the unit current source drives `input`.
    pub fn new(labels: &[&'static str], input: usize) -> Self {
        let n = labels.len();
        assert!(input < n, "input node out of range");
        Self {
            labels: labels.to_vec(),
            y: vec![vec![Entry::zero(); n]; n],
            input,
        }
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[&'static str] {
        &self.labels
    }

    pub fn input(&self) -> usize {
        self.input
    }

    pub fn entry(&self, row: usize, col: usize) -> &Entry {
        &self.y[row][col]
    }

    fn add_branch(&mut self, a: usize, b: Option<usize>, y: Entry) {
        self.y[a][a] = &self.y[a][a] + &y;
        if let Some(b) = b {
            self.y[b][b] = &self.y[b][b] + &y;
            self.y[a][b] = &self.y[a][b] - &y;
            self.y[b][a] = &self.y[b][a] - &y;
        }
    }

    /// Conductance `g` between `a` and `b` (ground when `None`).
    pub fn conductance(&mut self, a: usize, b: Option<usize>, g: f64) {
        self.add_branch(a, b, Entry::constant(ex(g)));
    }

    /// Resistor of `r` ohms; its conductance `1/r` is taken exactly.
    pub fn resistor(&mut self, a: usize, b: Option<usize>, r: f64) {
        let g = Exact::one() / ex(r);
        self.add_branch(a, b, Entry::constant(g));
    }

    pub fn capacitor(&mut self, a: usize, b: Option<usize>, c: f64) {
        self.add_branch(a, b, Entry::monomial(ex(c), 1));
    }

    /// Current `gm·V_ctrl` flowing out of node `out` to ground.
    pub fn vccs(&mut self, ctrl: usize, out: usize, gm: f64) {
        self.y[out][ctrl] = &self.y[out][ctrl] + &Entry::constant(ex(gm));
    }

    /// `det Y(s)` by Laplace expansion.
    pub fn determinant(&self) -> Entry {
        det(&self.y)
    }

    /// Determinant with column `col` replaced by the unit excitation.
    fn cramer_numerator(&self, col: usize) -> Entry {
        let mut m = self.y.clone();
        for (i, row) in m.iter_mut().enumerate() {
            row[col] = if i == self.input { Entry::one() } else { Entry::zero() };
        }
        det(&m)
    }
}

fn det(m: &[Vec<Entry>]) -> Entry {
    let n = m.len();
    match n {
        0 => Entry::one(),
        1 => m[0][0].clone(),
        2 => &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0]),
        _ => {
            let mut acc = Entry::zero();
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<Entry>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(k, _)| *k != j)
                            .map(|(_, e)| e.clone())
                            .collect()
                    })
                    .collect();
                let term = &m[0][j] * &det(&minor);
                acc = if j % 2 == 0 { &acc + &term } else { &acc - &term };
            }
            acc
        }
    }
}

/// Stamps the small-signal model of `circuit`.
///
/// Gain stages are transconductors; a stage is inverting when its current
/// `gm·V_in` is drawn out of its output node. The current buffer passes the
/// current entering its low-impedance input `Vc` on to `V1` and presents
/// conductance `gmc` to ground at `Vc`; its output impedance is infinite.
pub fn build_mna(circuit: &Circuit) -> Result<MnaSystem, NetlistError> {
    circuit.validate()?;
    let sys = match circuit {
        Circuit::TwoStage(p) => {
            let mut m = MnaSystem::new(&["V1", "V2"], 0);
            m.resistor(0, None, p.r1);
            m.capacitor(0, None, p.c1);
            m.resistor(1, None, p.r2);
            m.capacitor(1, None, p.c2);
            if p.cc != 0.0 {
                m.capacitor(0, Some(1), p.cc);
            }
            m.vccs(0, 1, p.gm);
            m
        }
        Circuit::CurrentBuffer(p) => {
            let mut m = MnaSystem::new(&["V1", "V2", "Vc"], 0);
            m.resistor(0, None, p.r1);
            m.capacitor(0, None, p.c1);
            m.resistor(1, None, p.r2);
            m.capacitor(1, None, p.c2);
            if p.cc != 0.0 {
                m.capacitor(1, Some(2), p.cc);
            }
            m.conductance(2, None, p.gmc);
            m.vccs(0, 1, p.gm);
            // buffer output: gmc·Vc delivered into V1
            m.vccs(2, 0, -p.gmc);
            m
        }
        Circuit::Nmc(p) => {
            let mut m = MnaSystem::new(&["V0", "V1", "V2"], 0);
            m.resistor(0, None, p.r0);
            m.capacitor(0, None, p.c0);
            m.resistor(1, None, p.r1);
            m.capacitor(1, None, p.c1);
            m.resistor(2, None, p.r2);
            m.capacitor(2, None, p.c2);
            if p.cc0 != 0.0 {
                m.capacitor(2, Some(0), p.cc0);
            }
            if p.cc1 != 0.0 {
                m.capacitor(2, Some(1), p.cc1);
            }
            // non-inverting middle stage, inverting output stage: both
            // Miller loops are then negative
            m.vccs(0, 1, -p.gm1);
            m.vccs(1, 2, p.gm2);
            m
        }
    };
    Ok(sys)
}

/// `V_out / I_in` by Cramer's rule.
pub fn mna_transfer(sys: &MnaSystem, in_node: usize, out_node: usize) -> Result<RationalFunction<Exact>, NetlistError> {
    let n = sys.size();
    if in_node >= n {
        return Err(NetlistError::NodeOutOfRange(in_node));
    }
    if out_node >= n {
        return Err(NetlistError::NodeOutOfRange(out_node));
    }
    let mut driven = sys.clone();
    driven.input = in_node;
    let den = driven.determinant();
    if den.is_zero() {
        return Err(NetlistError::DegenerateNetwork);
    }
    RationalFunction::new(driven.cramer_numerator(out_node), den).map_err(|_| NetlistError::DegenerateNetwork)
}

/// Driving-point impedance `V_node / I_node`.
pub fn mna_input_impedance(sys: &MnaSystem, node: usize) -> Result<RationalFunction<Exact>, NetlistError> {
    mna_transfer(sys, node, node)
}
