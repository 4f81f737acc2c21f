//! Trajectories compared against values frozen from an independent dense
//! Lindblad integration (same split-step scheme, explicit dissipator
//! built from the jump operators) and from the exact separable solution of
//! the closed lattice.

use photon_lattice::{
    BasisSet, Boundary, Engine64, Frame, GridSpec, Method, PhysicalParams64, Representation, SimulationConfig64,
};

const TOL: f64 = 1e-10;

struct Frozen {
    w: usize,
    h: usize,
    method: Method,
    step: usize,
    dissipative: f64,
    in_plane: f64,
    corner: f64,
    centre: f64,
}

#[rustfmt::skip]
const OPEN: &[Frozen] = &[
    Frozen { w: 3, h: 3, method: Method::A, step: 50, dissipative: 0.4241466070774494, in_plane: 0.5758533929225946, corner: 0.12609837089289647, centre: 0.011232407640528366 },
    Frozen { w: 3, h: 3, method: Method::A, step: 100, dissipative: 0.7388395610532082, in_plane: 0.26116043894685, corner: 0.003832883345475308, centre: 0.2115492507734812 },
    Frozen { w: 3, h: 3, method: Method::A, step: 300, dissipative: 0.9725755603411518, in_plane: 0.027424439658922366, corner: 0.004459611814431321, centre: 0.007138948740635328 },
    Frozen { w: 3, h: 3, method: Method::B, step: 50, dissipative: 0.5474271501962491, in_plane: 0.4525728498037969, corner: 0.08875174885443166, centre: 0.005732960675771726 },
    Frozen { w: 3, h: 3, method: Method::B, step: 100, dissipative: 0.8975875649878843, in_plane: 0.10241243501217204, corner: 0.0004893557562816394, centre: 0.07532719925855083 },
    Frozen { w: 3, h: 3, method: Method::B, step: 300, dissipative: 0.9982421594866725, in_plane: 0.0017578405133918135, corner: 0.0003507118772487366, centre: 1.5534289765260408e-05 },
    Frozen { w: 5, h: 5, method: Method::A, step: 50, dissipative: 0.10194492641514956, in_plane: 0.8980550735848389, corner: 0.013799113759002777, centre: 0.002337305578512079 },
    Frozen { w: 5, h: 5, method: Method::A, step: 100, dissipative: 0.5857451787684917, in_plane: 0.41425482123149415, corner: 0.060470104124736426, centre: 0.03907951954225707 },
    Frozen { w: 5, h: 5, method: Method::A, step: 300, dissipative: 0.8961826452542655, in_plane: 0.10381735474570485, corner: 0.003933538134898833, centre: 0.014495561660328721 },
    Frozen { w: 5, h: 5, method: Method::B, step: 50, dissipative: 0.10866119238314152, in_plane: 0.8913388076168235, corner: 0.01106288876767209, centre: 0.0023261614756880777 },
    Frozen { w: 5, h: 5, method: Method::B, step: 100, dissipative: 0.6988872606659359, in_plane: 0.30111273933401905, corner: 0.03213317092253314, centre: 0.03205459337005819 },
    Frozen { w: 5, h: 5, method: Method::B, step: 300, dissipative: 0.9396690529701056, in_plane: 0.060330947029832764, corner: 0.0005076523998247532, centre: 0.005994759311524313 },
    Frozen { w: 4, h: 3, method: Method::B, step: 50, dissipative: 0.45424838211066854, in_plane: 0.5457516178892657, corner: 0.08589799897729172, centre: 0.00465173911893979 },
    Frozen { w: 4, h: 3, method: Method::B, step: 100, dissipative: 0.8580514552617583, in_plane: 0.1419485447381488, corner: 0.0004176860546886643, centre: 0.06265170514712398 },
    Frozen { w: 4, h: 3, method: Method::B, step: 300, dissipative: 0.9935515373136782, in_plane: 0.00644846268621613, corner: 7.359895999048607e-05, centre: 0.0005805375568952679 },
];

fn check_open(repr: Representation, frame: Frame) {
    for f in OPEN {
        let g = GridSpec::new(f.w, f.h).unwrap();
        let mut e = Engine64::builder(BasisSet::enumerate(g, f.method, Boundary::Open), PhysicalParams64::default())
            .representation(repr)
            .frame(frame)
            .build()
            .unwrap();
        e.advance(f.step);
        let p = e.site_populations();
        let c = g.ordinal(g.center());
        let label = format!("{}x{} {} step {} ({repr}/{frame})", f.w, f.h, f.method, f.step);
        assert!((e.dissipative_probability() - f.dissipative).abs() < TOL, "{label}: dissipative");
        assert!((p.iter().sum::<f64>() - f.in_plane).abs() < TOL, "{label}: in-plane");
        assert!((p[0] - f.corner).abs() < TOL, "{label}: corner");
        assert!((p[c] - f.centre).abs() < TOL, "{label}: centre");
    }
}

#[test]
fn open_block_spectral_matches_reference() {
    check_open(Representation::BlockDensity, Frame::Spectral);
}

#[test]
fn open_block_site_matches_reference() {
    check_open(Representation::BlockDensity, Frame::Site);
}

#[test]
fn open_full_density_matches_reference() {
    check_open(Representation::FullDensity, Frame::Site);
}

/// (step, max site probability, P(15,15), P(0,15)) on the closed 31x31
/// lattice, from the product of two exact 31-site chain solutions.
#[rustfmt::skip]
const CLOSED_31: &[(usize, f64, f64, f64)] = &[
    (300, 0.008149022566250224, 5.17230568117281e-06, 3.1659368853794245e-06),
    (400, 0.015865554682094433, 0.0009357306398764285, 0.003853035898440435),
    (500, 0.024962906888799673, 0.0007776693072039635, 0.0015047005303828408),
    (750, 0.008233156358477395, 0.0024074681150864276, 0.00044285130020335064),
    (1000, 0.008061182791966263, 0.006707724140529785, 2.895937420567751e-07),
    (2000, 0.010125881762282312, 0.0054130214160047945, 0.0009344739735359099),
    (5000, 0.016565358324114078, 0.00012287334989286272, 0.0003439388259274508),
    (10000, 0.009080557835776618, 8.266586693788256e-06, 9.187577312330711e-06),
];

#[test]
fn closed_31x31_matches_separable_solution() {
    let mut c = SimulationConfig64::new(GridSpec::new(31, 31).unwrap(), Method::A, Boundary::Closed);
    c.timeseries_stride = 0;
    c.snapshot_steps = vec![300, 400, 500, 750, 1000, 2000, 5000, 10000];
    let t = photon_lattice::evolve(&c).unwrap();
    for (&(step, max, centre, edge), s) in CLOSED_31.iter().zip(&t.snapshots) {
        assert_eq!(s.step, step);
        assert!((s.max_site_probability - max).abs() < TOL, "step {step}: max");
        assert!((s.field.get(15, 15) - centre).abs() < TOL, "step {step}: centre");
        assert!((s.field.get(0, 15) - edge).abs() < TOL, "step {step}: edge");
        assert!((s.field.get(15, 0) - edge).abs() < TOL, "step {step}: edge");
    }
}

#[test]
fn closed_pure_state_matches_separable_solution() {
    let g = GridSpec::new(31, 31).unwrap();
    let mut e = Engine64::builder(BasisSet::enumerate(g, Method::A, Boundary::Closed), PhysicalParams64::default())
        .representation(Representation::PureState)
        .build()
        .unwrap();
    let mut done = 0;
    for &(step, max, centre, _) in CLOSED_31 {
        e.advance(step - done);
        done = step;
        let f = e.site_field();
        assert!((f.max() - max).abs() < TOL);
        assert!((f.get(15, 15) - centre).abs() < TOL);
    }
}
