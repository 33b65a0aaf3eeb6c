//! Per-joint hybrid position-force control with disturbance and reaction
//! force observers.
//!
//! Each joint runs a PD controller on angle, a P controller on torque, a
//! DOB that estimates the total load disturbance, and an RFOB that removes
//! modeled gravity and friction from that estimate to recover the reaction
//! torque against the contact or operator. The RFOB output is what
//! populates [`JointState::tau`] everywhere downstream.

use crate::sim::JointParams;

/// Angle, velocity and external torque of one joint, response side.
///
/// `tau` is the reaction torque estimated by the RFOB (torque the joint
/// exerts on whatever it touches), not a sensed value.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JointState {
    pub theta: f64,
    pub omega: f64,
    pub tau: f64,
}

impl JointState {
    pub fn is_finite(&self) -> bool {
        self.theta.is_finite() && self.omega.is_finite() && self.tau.is_finite()
    }
}

/// Reference command for one joint.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CommandFrame {
    pub theta_ref: f64,
    pub omega_ref: f64,
    pub tau_ref: f64,
}

impl CommandFrame {
    pub fn is_finite(&self) -> bool {
        self.theta_ref.is_finite() && self.omega_ref.is_finite() && self.tau_ref.is_finite()
    }
}

/// PD position gains plus the dimensionless force P gain.
#[derive(Debug, Clone, Copy)]
pub struct GainSet {
    /// Position gain, 1/s^2.
    pub kp: f64,
    /// Velocity gain, 1/s.
    pub kd: f64,
    /// Force gain, dimensionless.
    pub kf: f64,
}

impl GainSet {
    /// Critically damped PD for a given natural frequency (rad/s).
    pub fn critically_damped(omega_n: f64, kf: f64) -> Self {
        GainSet {
            kp: omega_n * omega_n,
            kd: 2.0 * omega_n,
            kf,
        }
    }

    /// True when `kd^2 < 4 kp`, i.e. the position loop would ring.
    pub fn is_underdamped(&self) -> bool {
        self.kd * self.kd < 4.0 * self.kp
    }
}

/// First-order low-pass state shared by the DOB and RFOB structure.
#[derive(Debug, Clone)]
pub struct ObserverState {
    /// Cutoff, rad/s. Discrete update requires `g * dt < 1`.
    pub cutoff: f64,
    /// DOB filter state, N·m.
    z_dob: f64,
    /// RFOB filter state, N·m.
    z_rfob: f64,
    /// Nominal joint model used by both observers.
    pub nominal: JointParams,
    /// Scale on the modeled gravity/friction compensation; 1.0 = exact model.
    pub compensation_scale: f64,
    /// Last measured velocity, for the `g J_n omega` terms.
    omega: f64,
}

impl ObserverState {
    pub fn new(cutoff: f64, nominal: JointParams, compensation_scale: f64) -> Self {
        ObserverState {
            cutoff,
            z_dob: 0.0,
            z_rfob: 0.0,
            nominal,
            compensation_scale,
            omega: 0.0,
        }
    }

    /// Current disturbance estimate (load convention: `J_n a = tau_m - tau_dis`).
    pub fn tau_dis(&self) -> f64 {
        self.z_dob - self.cutoff * self.nominal.inertia_nominal * self.omega
    }

    /// Current reaction torque estimate: the torque the joint exerts on
    /// whatever it touches (environment or operator hand), i.e. the negative
    /// of the externally applied torque. This convention is what makes the
    /// `Kf (tau_ref - tau_res)` force channel comply with an external push
    /// rather than fight it.
    pub fn tau_reaction(&self) -> f64 {
        self.z_rfob - self.cutoff * self.nominal.inertia_nominal * self.omega
    }

    /// Advances both observer filters given the applied motor torque and the
    /// measured velocity/angle for this tick. Returns
    /// `(tau_dis, tau_reaction)` evaluated after the update.
    pub fn update(&mut self, motor_torque: f64, theta: f64, omega: f64, dt: f64) -> (f64, f64) {
        let g = self.cutoff;
        let jn = self.nominal.inertia_nominal;
        self.omega = omega;
        let gjw = g * jn * omega;

        // DOB: tau_dis_hat = LPF[tau_m + g J_n w] - g J_n w
        self.z_dob += g * dt * ((motor_torque + gjw) - self.z_dob);

        // RFOB: same filter, but the modeled gravity and friction load is
        // removed so only the external torque remains.
        let model = self.compensation_scale
            * (self.nominal.gravity_torque(theta) + self.nominal.friction_kinetic(omega));
        self.z_rfob += g * dt * ((motor_torque + gjw + model) - self.z_rfob);

        (self.tau_dis(), self.tau_reaction())
    }
}

/// Hybrid position-force controller for one joint.
#[derive(Debug, Clone)]
pub struct JointController {
    pub gains: GainSet,
    pub obs: ObserverState,
    pub torque_max: f64,
    pub fault: bool,
}

impl JointController {
    pub fn new(gains: GainSet, obs: ObserverState, torque_max: f64) -> Self {
        JointController {
            gains,
            obs,
            torque_max,
            fault: false,
        }
    }

    /// One 500 Hz control tick: acceleration reference from the PD + force P
    /// channels, DOB compensation, saturation, then observer update.
    ///
    /// `res.tau` is ignored; the force channel always uses this controller's
    /// own RFOB estimate.
    pub fn step(&mut self, cmd: &CommandFrame, res: &JointState, dt: f64) -> f64 {
        if !cmd.is_finite() || !res.is_finite() {
            self.fault = true;
            return 0.0;
        }
        let jn = self.obs.nominal.inertia_nominal;
        let tau_res = self.obs.tau_reaction();
        let accel = self.gains.kp * (cmd.theta_ref - res.theta)
            + self.gains.kd * (cmd.omega_ref - res.omega)
            + (self.gains.kf / jn) * (cmd.tau_ref - tau_res);
        let raw = jn * accel + self.obs.tau_dis();
        let motor = raw.clamp(-self.torque_max, self.torque_max);
        self.obs.update(motor, res.theta, res.omega, dt);
        motor
    }

    /// RFOB reaction-torque estimate as of the last `step`.
    pub fn tau_reaction(&self) -> f64 {
        self.obs.tau_reaction()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::JointParams;
    use crate::CONTROL_DT;

    fn plain_joint() -> JointParams {
        JointParams {
            inertia_nominal: 0.02,
            inertia_true: 0.02,
            viscous: 0.0,
            coulomb: 0.0,
            stribeck_torque: 0.0,
            stribeck_vel: 0.1,
            gravity: 0.0,
            limit_lo: -10.0,
            limit_hi: 10.0,
            torque_max: 50.0,
        }
    }

    fn observer(j: JointParams) -> ObserverState {
        ObserverState::new(100.0, j, 1.0)
    }

    #[test]
    fn zero_error_zero_torque() {
        let mut c = JointController::new(
            GainSet::critically_damped(20.0, 1.0),
            observer(plain_joint()),
            8.0,
        );
        let res = JointState::default();
        let cmd = CommandFrame::default();
        let tau = c.step(&cmd, &res, CONTROL_DT);
        assert_eq!(tau, 0.0);
        assert!(!c.fault);
    }

    #[test]
    fn non_finite_input_faults() {
        let mut c = JointController::new(
            GainSet::critically_damped(20.0, 1.0),
            observer(plain_joint()),
            8.0,
        );
        let res = JointState {
            theta: f64::NAN,
            ..Default::default()
        };
        c.step(&CommandFrame::default(), &res, CONTROL_DT);
        assert!(c.fault);
    }

    /// Closed-loop step response on a frictionless nominal joint must match
    /// the critically damped second-order form: no more than 2% overshoot.
    #[test]
    fn step_response_critically_damped() {
        let p = plain_joint();
        let mut c = JointController::new(GainSet::critically_damped(20.0, 0.0), observer(p), 50.0);
        let dt = CONTROL_DT;
        let target = 0.5;
        let mut theta = 0.0;
        let mut omega = 0.0;
        let mut peak: f64 = 0.0;
        for _ in 0..2000 {
            let res = JointState {
                theta,
                omega,
                tau: 0.0,
            };
            let cmd = CommandFrame {
                theta_ref: target,
                omega_ref: 0.0,
                tau_ref: 0.0,
            };
            let tau = c.step(&cmd, &res, dt);
            omega += dt * tau / p.inertia_true;
            theta += dt * omega;
            peak = peak.max(theta);
        }
        assert!((theta - target).abs() < 0.01 * target, "theta={theta}");
        assert!(peak < 1.02 * target, "overshoot: peak={peak}");
    }

    /// DOB step response: a constant disturbance on a held joint is
    /// recovered within 1% after 5/g seconds.
    #[test]
    fn dob_constant_disturbance() {
        let p = plain_joint();
        let g = 100.0;
        let mut c = JointController::new(
            GainSet::critically_damped(30.0, 0.0),
            ObserverState::new(g, p, 1.0),
            50.0,
        );
        let dt = CONTROL_DT;
        let dist = -1.5; // external load torque
        let mut theta = 0.0;
        let mut omega = 0.0;
        let steps = (5.0 / g / dt).ceil() as usize + 2000;
        for _ in 0..steps {
            let res = JointState {
                theta,
                omega,
                tau: 0.0,
            };
            let tau = c.step(&CommandFrame::default(), &res, dt);
            omega += dt * (tau + dist) / p.inertia_true;
            theta += dt * omega;
        }
        // load convention: tau_dis = -(external torque)
        let est = c.obs.tau_dis();
        assert!(
            (est - (-dist)).abs() < 0.01 * dist.abs(),
            "est={est} want={}",
            -dist
        );
        // RFOB reports the reaction: opposite of the applied disturbance
        let ext = c.obs.tau_reaction();
        assert!((ext + dist).abs() < 0.02 * dist.abs(), "ext={ext}");
    }

    /// First-order Bode magnitude: a sinusoidal disturbance far above the
    /// cutoff is attenuated by |g/(jw+g)| within 10%.
    #[test]
    fn dob_sinusoid_attenuation() {
        let p = plain_joint();
        let g = 100.0;
        let w = 1000.0; // rad/s, 10x cutoff
        let dt = 1e-4; // finer step so the 159 Hz sinusoid is resolved
        let mut obs = ObserverState::new(g, p, 1.0);
        // held joint: omega = 0, motor torque balances the disturbance is not
        // needed; feed the disturbance straight into the filter input as the
        // reaction the motor would carry.
        let mut peak: f64 = 0.0;
        let mut t = 0.0;
        let steps = (1.0 / dt) as usize;
        for _ in 0..steps {
            let d = libm::sin(w * t);
            obs.update(d, 0.0, 0.0, dt);
            if t > 0.5 {
                peak = peak.max(obs.tau_dis().abs());
            }
            t += dt;
        }
        let expected = g / libm::sqrt(w * w + g * g);
        assert!(
            (peak - expected).abs() < 0.1 * expected,
            "peak={peak} expected={expected}"
        );
    }

    /// Observer linearity: estimate of d1+d2 equals sum of separate
    /// estimates to 1e-9 relative.
    #[test]
    fn dob_superposition() {
        let p = plain_joint();
        let run = |d1: f64, d2: f64| -> f64 {
            let mut obs = ObserverState::new(100.0, p, 1.0);
            let mut t = 0.0;
            for _ in 0..500 {
                let u = d1 * libm::sin(3.0 * t) + d2 * libm::cos(7.0 * t);
                obs.update(u, 0.0, 0.0, CONTROL_DT);
                t += CONTROL_DT;
            }
            obs.tau_dis()
        };
        let both = run(0.8, -0.4);
        let sum = run(0.8, 0.0) + run(0.0, -0.4);
        assert!(
            (both - sum).abs() <= 1e-9 * both.abs().max(1.0),
            "both={both} sum={sum}"
        );
    }

    /// RFOB with exact friction/gravity models on a moving joint converges
    /// to zero external torque within 2% of the friction magnitude.
    #[test]
    fn rfob_compensates_internal_torques() {
        let mut p = plain_joint();
        p.viscous = 0.05;
        p.coulomb = 0.04;
        p.stribeck_torque = 0.05;
        p.gravity = 0.3;
        let mut c = JointController::new(
            GainSet::critically_damped(20.0, 0.0),
            ObserverState::new(100.0, p, 1.0),
            50.0,
        );
        let dt = CONTROL_DT;
        let mut theta: f64 = 0.0;
        let mut omega = 0.0;
        let mut t = 0.0;
        for _ in 0..5000 {
            // slow sinusoidal sweep keeps the joint moving
            let cmd = CommandFrame {
                theta_ref: 0.4 * libm::sin(2.0 * t),
                omega_ref: 0.8 * libm::cos(2.0 * t),
                tau_ref: 0.0,
            };
            let res = JointState {
                theta,
                omega,
                tau: 0.0,
            };
            let tau = c.step(&cmd, &res, dt);
            let net = tau + p.gravity_torque(theta) + p.friction_kinetic(omega);
            omega += dt * net / p.inertia_true;
            theta += dt * omega;
            t += dt;
        }
        let fric_mag = p.coulomb + p.stribeck_torque + p.viscous * omega.abs();
        assert!(
            c.obs.tau_reaction().abs() < 0.02 * fric_mag.max(p.gravity),
            "tau_reaction={}",
            c.obs.tau_reaction()
        );
    }

    /// RFOB step response to a constant contact torque.
    #[test]
    fn rfob_constant_contact() {
        let p = plain_joint();
        let g = 100.0;
        let mut c = JointController::new(
            GainSet::critically_damped(30.0, 0.0),
            ObserverState::new(g, p, 1.0),
            50.0,
        );
        let dt = CONTROL_DT;
        let contact = 0.9;
        let mut theta = 0.0;
        let mut omega = 0.0;
        for _ in 0..((5.0 / g / dt) as usize + 3000) {
            let res = JointState {
                theta,
                omega,
                tau: 0.0,
            };
            let tau = c.step(&CommandFrame::default(), &res, dt);
            omega += dt * (tau + contact) / p.inertia_true;
            theta += dt * omega;
        }
        // reaction convention: the joint pushes back with -contact
        let est = c.obs.tau_reaction();
        assert!((est + contact).abs() < 0.02 * contact, "est={est}");
    }

    /// 30% inertia mismatch on a free swing: the steady RFOB bias stays
    /// within the regression-pinned bound.
    #[test]
    fn rfob_inertia_mismatch_bias() {
        let mut p = plain_joint();
        p.inertia_true = 0.026; // +30% over nominal
        let mut c = JointController::new(
            GainSet::critically_damped(20.0, 0.0),
            ObserverState::new(100.0, p, 1.0),
            50.0,
        );
        let dt = CONTROL_DT;
        let mut theta: f64 = 0.0;
        let mut omega = 0.0;
        let mut t = 0.0;
        let mut worst: f64 = 0.0;
        for _ in 0..5000 {
            let cmd = CommandFrame {
                theta_ref: 0.4 * libm::sin(3.0 * t),
                omega_ref: 1.2 * libm::cos(3.0 * t),
                tau_ref: 0.0,
            };
            let res = JointState {
                theta,
                omega,
                tau: 0.0,
            };
            let tau = c.step(&cmd, &res, dt);
            omega += dt * tau / p.inertia_true;
            theta += dt * omega;
            t += dt;
            if t > 2.0 {
                worst = worst.max(c.obs.tau_reaction().abs());
            }
        }
        // mismatch-induced bias bound: |J - Jn| * peak accel, with margin
        let bound = (p.inertia_true - p.inertia_nominal).abs() * 0.4 * 9.0 * 2.0;
        assert!(worst < bound, "worst={worst} bound={bound}");
    }

    /// With DOB active the steady position error under a constant load is at
    /// most 5% of the error with the DOB disabled.
    #[test]
    fn dob_shrinks_steady_state_error() {
        let p = plain_joint();
        let run = |with_dob: bool| -> f64 {
            let mut c = JointController::new(
                GainSet::critically_damped(20.0, 0.0),
                ObserverState::new(100.0, p, 1.0),
                50.0,
            );
            let dt = CONTROL_DT;
            let load = -0.8;
            let mut theta = 0.0;
            let mut omega = 0.0;
            for _ in 0..5000 {
                let res = JointState {
                    theta,
                    omega,
                    tau: 0.0,
                };
                let mut tau = c.step(&CommandFrame::default(), &res, dt);
                if !with_dob {
                    tau -= c.obs.tau_dis();
                }
                omega += dt * (tau + load) / p.inertia_true;
                theta += dt * omega;
            }
            theta.abs()
        };
        let with_dob = run(true);
        let without = run(false);
        assert!(
            with_dob <= 0.05 * without,
            "with={with_dob} without={without}"
        );
    }
}
