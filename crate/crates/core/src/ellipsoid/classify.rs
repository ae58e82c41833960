//! Which coordinate sections are half-geodesics.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::metric::{verify_one_over_k, ToleranceConfig, Verdict, VerificationReport};

use super::{coordinate_sections, Ellipsoid, Plane, ShootingConfig, ShootingOracle};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionVerdict {
    pub plane: Plane,
    pub perimeter: f64,
    pub verdict: Verdict,
    pub max_deviation: f64,
    #[serde(skip)]
    pub report: Option<VerificationReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub axes: [f64; 3],
    pub sections: Vec<SectionVerdict>,
}

impl ClassificationReport {
    pub fn passing(&self) -> Vec<Plane> {
        self.sections.iter().filter(|s| s.verdict == Verdict::Pass).map(|s| s.plane).collect()
    }

    pub fn section(&self, plane: Plane) -> &SectionVerdict {
        self.sections.iter().find(|s| s.plane == plane).unwrap()
    }
}

/// Runs the k = 2 verifier on each coordinate section with shooting
/// distances. Needs `a < b < c` or a sphere; partial degeneracies have
/// families of sections and are rejected.
pub fn classify_section_half_geodesics(ell: &Ellipsoid, shooting: &ShootingConfig, tol: &ToleranceConfig) -> Result<ClassificationReport> {
    if !(ell.is_triaxial() || ell.is_sphere()) {
        return Err(invalid(format!("classification needs a < b < c or a sphere, got {:?}", ell.axes())));
    }
    let oracle = ShootingOracle::new(*ell, *shooting)?;
    let sections = coordinate_sections(ell)?
        .into_iter()
        .map(|sec| {
            let report = verify_one_over_k(ell, &sec.curve, &oracle, 2, tol)?;
            Ok(SectionVerdict {
                plane: sec.plane,
                perimeter: sec.perimeter,
                verdict: report.verdict,
                max_deviation: report.max_deviation,
                report: Some(report),
            })
        })
        .collect::<Result<_>>()?;
    Ok(ClassificationReport { axes: ell.axes(), sections })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fast() -> (ShootingConfig, ToleranceConfig) {
        let shoot = ShootingConfig { resolution: 1e-2, ..ShootingConfig::default() };
        (shoot, ToleranceConfig::for_oracle_error(shoot.declared_error).with_samples(8))
    }

    #[test]
    fn near_round_ellipsoid_has_one_half_geodesic() {
        let ell = Ellipsoid::new(1.0, 1.005, 1.01).unwrap();
        let (shoot, tol) = fast();
        let r = classify_section_half_geodesics(&ell, &shoot, &tol).unwrap();
        assert_eq!(r.passing(), vec![Plane::AB], "{r:?}");
        for plane in [Plane::AC, Plane::BC] {
            let s = r.section(plane);
            let gap = 0.5 * (s.perimeter - r.section(Plane::AB).perimeter);
            assert_eq!(s.verdict, Verdict::Fail);
            assert!(s.max_deviation >= gap - 1e-9, "{plane:?}: {} < {gap}", s.max_deviation);
        }
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["sections"].as_array().unwrap().len(), 3);
        assert!(json["sections"][0].get("report").is_none());
    }

    #[test]
    fn sphere_sections_all_pass() {
        let (shoot, tol) = fast();
        let r = classify_section_half_geodesics(&Ellipsoid::sphere(1.0).unwrap(), &shoot, &tol).unwrap();
        assert!(r.sections.iter().all(|s| s.verdict == Verdict::Pass && s.max_deviation <= 1e-9), "{r:?}");
    }

    #[test]
    fn partial_degeneracy_is_rejected() {
        let (shoot, tol) = fast();
        assert!(classify_section_half_geodesics(&Ellipsoid::new(1.0, 1.0, 1.2).unwrap(), &shoot, &tol).is_err());
    }
}
