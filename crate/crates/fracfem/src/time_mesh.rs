//! Time meshes on [0, T]: graded t_n = T (n/N)^r, uniform, and the two-part
//! mesh (graded on [0, T0], uniform on [T0, T]) used to restore resolution
//! near the final time.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum MeshKind {
    Graded,
    Uniform,
    /// Graded on [0, t0] with n0 intervals, uniform afterwards.
    TwoPart { t0: f64, n0: usize },
}

#[derive(Debug, Clone)]
pub struct TimeMesh {
    t_final: f64,
    grading: f64,
    nodes: Vec<f64>,
    kind: MeshKind,
}

/// The sigma-shifted evaluation point t_{n-sigma} = (1-sigma) t_n + sigma t_{n-1}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaPoint {
    pub level: usize,
    pub t: f64,
}

fn check_common(t_final: f64, n: usize) -> Result<()> {
    if !(t_final > 0.0) {
        return Err(Error::InvalidParameter(format!("T must be > 0, got {t_final}")));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("N must be >= 1".into()));
    }
    Ok(())
}

impl TimeMesh {
    /// Graded mesh t_n = T (n/N)^r. r = 1 gives uniform spacing.
    pub fn graded(t_final: f64, n: usize, r: f64) -> Result<Self> {
        check_common(t_final, n)?;
        if !(r >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "grading exponent must satisfy r >= 1, got {r}"
            )));
        }
        // closed form per node, not cumulative sums, so t_N = T exactly
        let nodes = (0..=n)
            .map(|k| t_final * (k as f64 / n as f64).powf(r))
            .collect();
        Ok(TimeMesh { t_final, grading: r, nodes, kind: MeshKind::Graded })
    }

    pub fn uniform(t_final: f64, n: usize) -> Result<Self> {
        check_common(t_final, n)?;
        let nodes = (0..=n).map(|k| t_final * k as f64 / n as f64).collect();
        Ok(TimeMesh { t_final, grading: 1.0, nodes, kind: MeshKind::Uniform })
    }

    /// Two-part mesh: graded with exponent r on [0, T0], uniform on [T0, T],
    /// with T0 = min{T/2^r, (1 - 1/r) T}, N0 = ceil(rho0 N),
    /// rho0 = min{r/(2^r - 1 + r), r(r-1)/(1 + r(r-1))} and uniform step
    /// tau0 = (T - T0)/(N - N0). At r = 1 the split degenerates and a plain
    /// uniform mesh is returned.
    pub fn two_part(t_final: f64, n: usize, r: f64) -> Result<Self> {
        check_common(t_final, n)?;
        if !(r >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "grading exponent must satisfy r >= 1, got {r}"
            )));
        }
        if r == 1.0 {
            return Self::uniform(t_final, n);
        }
        let t0 = (t_final / 2f64.powf(r)).min((1.0 - 1.0 / r) * t_final);
        let rho0 = (r / (2f64.powf(r) - 1.0 + r)).min(r * (r - 1.0) / (1.0 + r * (r - 1.0)));
        let n0 = (rho0 * n as f64).ceil() as usize;
        if n0 == 0 || n0 >= n {
            return Err(Error::InvalidParameter(format!(
                "two-part mesh needs 0 < N0 < N; got N0 = {n0} for N = {n}, r = {r}"
            )));
        }
        let tau0 = (t_final - t0) / (n - n0) as f64;
        let mut nodes = Vec::with_capacity(n + 1);
        for k in 0..=n0 {
            nodes.push(t0 * (k as f64 / n0 as f64).powf(r));
        }
        for k in 1..=(n - n0) {
            nodes.push(t0 + tau0 * k as f64);
        }
        // the closed forms above make interior monotonicity automatic; pin the endpoint
        nodes[n] = t_final;
        Ok(TimeMesh { t_final, grading: r, nodes, kind: MeshKind::TwoPart { t0, n0 } })
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    /// Number of intervals N.
    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    pub fn kind(&self) -> &MeshKind {
        &self.kind
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Node t_n, 0 <= n <= N.
    pub fn node(&self, n: usize) -> f64 {
        self.nodes[n]
    }

    /// Step tau_n = t_n - t_{n-1}, 1 <= n <= N.
    pub fn step(&self, n: usize) -> f64 {
        self.nodes[n] - self.nodes[n - 1]
    }

    /// t_{n-sigma} for 1 <= n <= N, 0 <= sigma < 1.
    pub fn sigma_point(&self, n: usize, sigma: f64) -> Result<SigmaPoint> {
        if n == 0 || n > self.intervals() {
            return Err(Error::IndexOutOfRange { what: "time level", got: n, max: self.intervals() });
        }
        if !(0.0..1.0).contains(&sigma) {
            return Err(Error::InvalidParameter(format!(
                "sigma must lie in [0, 1), got {sigma}"
            )));
        }
        Ok(SigmaPoint {
            level: n,
            t: (1.0 - sigma) * self.nodes[n] + sigma * self.nodes[n - 1],
        })
    }

    /// Empirical max of tau_n / tau_{n-1} over n >= 2; stands in for the
    /// existential constant gamma in the step-ratio property.
    pub fn max_step_ratio(&self) -> f64 {
        let mut ratio: f64 = 0.0;
        for n in 2..=self.intervals() {
            ratio = ratio.max(self.step(n) / self.step(n - 1));
        }
        ratio
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn graded_closed_form_nodes() {
        let mesh = TimeMesh::graded(1.0, 4, 2.0).unwrap();
        let expect = [0.0, 1.0 / 16.0, 0.25, 9.0 / 16.0, 1.0];
        for (a, b) in mesh.nodes().iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn r_equal_one_is_uniform() {
        let g = TimeMesh::graded(1.0, 5, 1.0).unwrap();
        let u = TimeMesh::uniform(1.0, 5).unwrap();
        for (a, b) in g.nodes().iter().zip(u.nodes().iter()) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(*u.kind(), MeshKind::Uniform);
    }

    #[test]
    fn strong_grading_first_node() {
        let mesh = TimeMesh::graded(1.0, 25, 5.0).unwrap();
        assert!((mesh.node(1) - 25f64.powi(-5)).abs() < 1e-20);
        assert!((mesh.node(1) - 1.024e-7).abs() < 1e-12);
    }

    #[test]
    fn two_part_reference_values() {
        let mesh = TimeMesh::two_part(1.0, 25, 5.0).unwrap();
        let MeshKind::TwoPart { t0, n0 } = *mesh.kind() else {
            panic!("expected two-part kind")
        };
        assert!((t0 - 0.03125).abs() < 1e-15);
        assert_eq!(n0, 4); // ceil(25 * 5/36)
        assert!((mesh.node(n0) - t0).abs() < 1e-15);
        let tau0 = mesh.step(n0 + 1);
        assert!((tau0 - 0.96875 / 21.0).abs() < 1e-15);
        // uniform part has constant steps
        for n in (n0 + 1)..=25 {
            assert!((mesh.step(n) - tau0).abs() < 1e-14);
        }
        assert_eq!(mesh.node(25), 1.0);
    }

    #[test]
    fn two_part_r2_reference_values() {
        let mesh = TimeMesh::two_part(1.0, 25, 2.0).unwrap();
        let MeshKind::TwoPart { t0, n0 } = *mesh.kind() else {
            panic!("expected two-part kind")
        };
        assert!((t0 - 0.25).abs() < 1e-15); // min{1/4, 1/2}
        assert_eq!(n0, 10); // rho0 = min{2/5, 2/3} = 0.4
    }

    #[test]
    fn two_part_degenerate_inputs() {
        assert!(TimeMesh::two_part(1.0, 1, 2.0).is_err());
        assert!(TimeMesh::two_part(1.0, 0, 2.0).is_err());
        // r = 1 falls back to uniform
        let mesh = TimeMesh::two_part(1.0, 8, 1.0).unwrap();
        assert_eq!(*mesh.kind(), MeshKind::Uniform);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(TimeMesh::graded(1.0, 4, 0.5).is_err());
        assert!(TimeMesh::graded(0.0, 4, 2.0).is_err());
        assert!(TimeMesh::graded(-1.0, 4, 2.0).is_err());
        assert!(TimeMesh::graded(1.0, 0, 2.0).is_err());
    }

    #[test]
    fn sigma_point_values() {
        let u2 = TimeMesh::uniform(1.0, 2).unwrap();
        assert!((u2.sigma_point(1, 0.5).unwrap().t - 0.25).abs() < 1e-15);

        let g = TimeMesh::graded(1.0, 4, 2.0).unwrap();
        let p = g.sigma_point(2, 0.25).unwrap();
        assert!((p.t - (0.75 * 0.25 + 0.25 * 0.0625)).abs() < 1e-15);

        let p0 = g.sigma_point(1, 0.0).unwrap();
        assert!((p0.t - g.node(1)).abs() < 1e-15);

        assert!(g.sigma_point(0, 0.5).is_err());
        assert!(g.sigma_point(5, 0.5).is_err());
        assert!(g.sigma_point(1, 1.0).is_err());
    }

    #[test]
    fn sum_of_steps_recovers_t_final() {
        for mesh in [
            TimeMesh::graded(2.5, 37, 3.7).unwrap(),
            TimeMesh::two_part(2.5, 37, 3.7).unwrap(),
        ] {
            let total: f64 = (1..=mesh.intervals()).map(|n| mesh.step(n)).sum();
            assert!((total - 2.5).abs() < 1e-13);
        }
    }

    proptest! {
        #[test]
        fn graded_mesh_properties(
            n in 2usize..200,
            r in 1.0f64..6.0,
            t_final in 0.1f64..10.0,
        ) {
            let mesh = TimeMesh::graded(t_final, n, r).unwrap();
            prop_assert_eq!(mesh.intervals(), n);
            prop_assert_eq!(mesh.node(0), 0.0);
            prop_assert!((mesh.node(n) - t_final).abs() < 1e-12 * t_final);
            for k in 1..=n {
                // strictly increasing
                prop_assert!(mesh.step(k) > 0.0);
                // tau_n <= r T N^{-r} n^{r-1}, with head-room for round-off
                let bound = r * t_final * (n as f64).powf(-r) * (k as f64).powf(r - 1.0);
                prop_assert!(mesh.step(k) <= bound * (1.0 + 1e-12));
                // the equivalent form tau_n <= r T^{1/r} N^{-1} t_n^{1-1/r}
                let bound2 = r * t_final.powf(1.0 / r) / n as f64
                    * mesh.node(k).powf(1.0 - 1.0 / r);
                prop_assert!(mesh.step(k) <= bound2 * (1.0 + 1e-12));
            }
            for k in 2..=n {
                // t_n <= 2^r t_{n-1}
                prop_assert!(mesh.node(k) <= 2f64.powf(r) * mesh.node(k - 1) * (1.0 + 1e-12));
                // monotone steps
                prop_assert!(mesh.step(k) >= mesh.step(k - 1) * (1.0 - 1e-12));
            }
        }

        #[test]
        fn two_part_mesh_is_monotone(
            n in 3usize..200,
            r in 1.01f64..6.0,
        ) {
            // skip parameter combinations the constructor legitimately rejects
            if let Ok(mesh) = TimeMesh::two_part(1.0, n, r) {
                prop_assert_eq!(mesh.intervals(), n);
                prop_assert_eq!(mesh.node(0), 0.0);
                prop_assert_eq!(mesh.node(n), 1.0);
                for k in 1..=n {
                    prop_assert!(mesh.node(k) > mesh.node(k - 1));
                }
                let MeshKind::TwoPart { t0, n0 } = *mesh.kind() else {
                    return Err(TestCaseError::fail("expected two-part kind"));
                };
                prop_assert!((mesh.node(n0) - t0).abs() < 1e-14);
            }
        }

        #[test]
        fn sigma_point_stays_in_interval(
            n in 1usize..50,
            r in 1.0f64..5.0,
            sigma in 0.0f64..0.999,
        ) {
            let mesh = TimeMesh::graded(1.0, n, r).unwrap();
            for level in 1..=n {
                let p = mesh.sigma_point(level, sigma).unwrap().t;
                prop_assert!(p >= mesh.node(level - 1) && p <= mesh.node(level));
            }
        }
    }
}
