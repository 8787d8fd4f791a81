//! Running suprema of time-weighted norms.

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SupKind {
    /// `(1+t)^(1/2) ||u|| + (1+t) ||grad u||`
    M,
    /// `(1+t)^(1/4) ||u|| + (1+t)^(3/4) ||grad u||`
    M1,
    /// `(1+t)^(1/2) ||eta|| + (1+t) ||d_y eta||`
    M0,
    /// `(1+t)^(1/4) ||eta|| + (1+t)^(3/4) ||d_y eta||`
    M0Tilde,
    /// `exp(a0 t) ||u_tilde||_{H^1}`
    M2 { a0: f64 },
    /// `(1+t) ||u_bar - eta||_{H^1}`
    N1,
}

impl SupKind {
    /// Weighted value at time `t`. `primary` is the `L^2` (or `H^1`) norm,
    /// `gradient` the gradient norm where the kind uses one.
    pub fn weighted(&self, t: f64, primary: f64, gradient: f64) -> f64 {
        let s = 1.0 + t;
        match *self {
            SupKind::M | SupKind::M0 => s.sqrt() * primary + s * gradient,
            SupKind::M1 | SupKind::M0Tilde => s.powf(0.25) * primary + s.powf(0.75) * gradient,
            SupKind::M2 { a0 } => (a0 * t).exp() * primary,
            SupKind::N1 => s * primary,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupFunctionalTracker {
    pub kind: SupKind,
    pub running_sup: f64,
    /// `(t, running sup)` after each update.
    pub history: Vec<(f64, f64)>,
}

impl SupFunctionalTracker {
    pub fn new(kind: SupKind) -> Self {
        SupFunctionalTracker {
            kind,
            running_sup: 0.0,
            history: Vec::new(),
        }
    }

    pub fn update(&mut self, t: f64, primary: f64, gradient: f64) -> f64 {
        let v = self.kind.weighted(t, primary, gradient);
        if v > self.running_sup {
            self.running_sup = v;
        }
        self.history.push((t, self.running_sup));
        self.running_sup
    }
}
