use std::collections::BTreeMap;
use std::f64::consts::TAU;

use super::{AnalyticFact, GalleryItem, Relation};

/// Relative step every consecutive pair must decrease by.
const STRICT: f64 = 1e-9;

fn key(v: f64) -> String {
    format!("{v}")
}

/// Largest ratio v[i+1]/v[i] along `seq` sorted by its first component.
fn max_ratio(mut seq: Vec<(f64, f64)>) -> f64 {
    seq.sort_by(|a, b| a.0.total_cmp(&b.0));
    seq.windows(2).map(|w| w[1].1 / w[0].1).fold(f64::NEG_INFINITY, f64::max)
}

fn decreasing(quantity: String, seq: Vec<(f64, f64)>) -> Option<AnalyticFact> {
    if seq.len() < 2 {
        return None;
    }
    Some(AnalyticFact::new(&quantity, Relation::AtMost, 1.0 - STRICT, max_ratio(seq), 0.0))
}

/// Largest relative spread max/min − 1.
fn spread(vals: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    hi / lo - 1.0
}

fn group<'a>(items: &'a [GalleryItem], name: &str, by: &str) -> BTreeMap<String, Vec<&'a GalleryItem>> {
    let mut out: BTreeMap<String, Vec<&GalleryItem>> = BTreeMap::new();
    for it in items.iter().filter(|i| i.name == name) {
        out.entry(key(it.param(by).unwrap_or(f64::NAN))).or_default().push(it);
    }
    out
}

/// Trend and covariance facts across items of the same family.
pub fn family_facts(items: &[GalleryItem]) -> Vec<AnalyticFact> {
    let mut out = Vec::new();
    let p = |it: &GalleryItem, k: &str| it.param(k).unwrap_or(f64::NAN);

    // ε = 1/n members decrease in L²; fixed-n members obey the rescaling law.
    let cv: Vec<&GalleryItem> = items.iter().filter(|i| i.name == "concentrating_vortex").collect();
    let canonical: Vec<(f64, f64)> = cv
        .iter()
        .filter(|i| (p(i, "eps") * p(i, "n") - 1.0).abs() < 1e-12)
        .map(|i| (p(i, "n"), i.metric("u_l2")))
        .collect();
    out.extend(decreasing("concentrating_vortex/u_l2_decreasing".into(), canonical));
    for (n, g) in group(items, "concentrating_vortex", "n") {
        out.extend(rescaling(&format!("concentrating_vortex[n={n}]"), &g, "eps"));
    }

    let w: Vec<&GalleryItem> = items.iter().filter(|i| i.name == "w11_failure_family").collect();
    for (eps, g) in group(items, "w11_failure_family", "eps") {
        let tag = format!("w11_failure_family[eps={eps}]");
        out.extend(decreasing(format!("{tag}/omega_l1_decreasing"), g.iter().map(|i| (p(i, "n"), i.metric("omega_l1"))).collect()));
        out.extend(decreasing(
            format!("{tag}/l1_sum_decreasing"),
            g.iter().map(|i| (p(i, "n"), i.metric("u_l1") + i.metric("omega_l1"))).collect(),
        ));
    }
    // ‖∇ψ_n‖² = C + log(n)/2π once the mollifier sits inside the plateau.
    let mut by_n: Vec<(f64, f64)> = w.iter().map(|i| (p(i, "n"), i.metric("grad_psi_sq"))).collect();
    by_n.sort_by(|a, b| a.0.total_cmp(&b.0));
    by_n.dedup_by(|a, b| a.0 == b.0);
    for pair in by_n.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let expected = (b.0 / a.0).ln() / TAU;
        out.push(AnalyticFact::new(
            &format!("w11_failure_family/grad_psi_sq_log_growth[{}->{}]", a.0, b.0),
            Relation::Rel,
            expected,
            b.1 - a.1,
            1e-6,
        ));
    }

    for (m, g) in group(items, "checkerboard", "m") {
        out.extend(decreasing(
            format!("checkerboard[m={m}]/pairing_bump_error_decreasing"),
            g.iter().map(|i| (p(i, "n"), i.metric("pairing_bump_error"))).collect(),
        ));
    }
    for (n, g) in group(items, "checkerboard", "n") {
        out.extend(decreasing(
            format!("checkerboard[n={n}]/u_l1_decreasing_in_m"),
            g.iter().map(|i| (p(i, "m"), i.metric("u_l1"))).collect(),
        ));
    }

    for (kappa, g) in group(items, "oscillating_stream", "kappa") {
        if g.len() >= 2 {
            out.push(AnalyticFact::new(
                &format!("oscillating_stream[kappa={kappa}]/force_scaled_bounded"),
                Relation::AtMost,
                0.0,
                spread(g.iter().map(|i| i.metric("force_scaled"))),
                1e-10,
            ));
        }
    }

    let rp: Vec<&GalleryItem> = items.iter().filter(|i| i.name == "radial_patch").collect();
    out.extend(rescaling("radial_patch", &rp, "scale"));
    if rp.len() >= 2 {
        out.push(AnalyticFact::new(
            "radial_patch/dissipation_atom_invariant",
            Relation::AtMost,
            0.0,
            spread(rp.iter().map(|i| i.metric("dissipation_atom"))),
            1e-6,
        ));
    }

    let heat: Vec<&GalleryItem> = items.iter().filter(|i| i.name == "heat_self_similar").collect();
    if heat.len() >= 2 {
        out.push(AnalyticFact::new(
            "heat_self_similar/dissipation_identity",
            Relation::AtMost,
            0.0,
            spread(heat.iter().map(|i| i.metric("dissipation_identity"))),
            1e-3,
        ));
    }
    out
}

/// x ↦ λ⁻¹v(x/λ): L² invariant, L¹ proportional to λ.
fn rescaling(tag: &str, g: &[&GalleryItem], param: &str) -> Vec<AnalyticFact> {
    if g.len() < 2 {
        return Vec::new();
    }
    let lam = |i: &GalleryItem| i.param(param).unwrap_or(f64::NAN);
    vec![
        AnalyticFact::new(
            &format!("{tag}/u_l2_scale_invariant"),
            Relation::AtMost,
            0.0,
            spread(g.iter().map(|i| i.metric("u_l2"))),
            1e-4,
        ),
        AnalyticFact::new(
            &format!("{tag}/u_l1_linear_in_scale"),
            Relation::AtMost,
            0.0,
            spread(g.iter().map(|i| i.metric("u_l1") / lam(i))),
            2e-4,
        ),
    ]
}
