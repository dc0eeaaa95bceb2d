// Copyright 2026 raqr Contributors
// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64;
use raqr_core::mimo::{
    monte_carlo_rate, mrc_moments, zf_moments, Link, Method, MimoScenario, TermMoments,
};

fn link() -> Link {
    Link {
        rho: 1.5,
        phi: Complex64::from_polar(0.7, 0.3),
        rho_sn: 0.8,
        phi_sn: Complex64::from_polar(1.0, 0.3),
        varsigma_sq: 0.4,
        sigma_sq: 0.3,
    }
}

fn close(mc: f64, cf: f64, tol: f64) -> bool {
    (mc / cf - 1.0).abs() < tol
}

#[test]
fn mrc_terms_match_closed_form() {
    let mut sc = MimoScenario::uniform(24, 3, 6.9458e9, 1.0, 0.5);
    sc.beta = vec![0.4, 0.8, 1.2];
    sc.n_realizations = 20_000;
    let l = link();
    let r = monte_carlo_rate(&sc, &l, Method::Mrc).unwrap();
    for (u, c) in r.users.iter().zip(mrc_moments(&sc, &l).unwrap()) {
        let m: &TermMoments = &u.moments;
        assert!(close(m.ds, c.ds, 0.02));
        assert!(close(m.ls, c.ls, 0.05));
        assert!(close(m.ui, c.ui, 0.05));
        assert!(close(m.sn_self, c.sn_self, 0.05));
        assert!(close(m.sn_cross, c.sn_cross, 0.05));
        assert!(close(m.noise, c.noise, 0.05));
    }
}

#[test]
fn zf_terms_match_closed_form() {
    let mut sc = MimoScenario::uniform(24, 3, 6.9458e9, 1.0, 0.5);
    sc.beta = vec![0.4, 0.8, 1.2];
    sc.n_realizations = 20_000;
    let l = link();
    let r = monte_carlo_rate(&sc, &l, Method::Zf).unwrap();
    for (u, c) in r.users.iter().zip(zf_moments(&sc, &l).unwrap()) {
        let m = &u.moments;
        assert!(close(m.ds, c.ds, 1e-9));
        assert!(m.ls + m.ui < 1e-12 * m.ds);
        assert!(close(m.sn_self, c.sn_self, 0.06));
        assert!(close(m.sn_cross, c.sn_cross, 0.06));
        assert!(close(m.noise, c.noise, 0.05));
    }
}
