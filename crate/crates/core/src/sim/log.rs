//! Columnar run log and its CSV form.

use nalgebra::Vector3;

/// Full-rate time series captured during a run. Reference and actual state
/// are both kept so tracking and contact behavior can be analyzed offline.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimLog {
    pub t: Vec<f64>,
    /// Index into `phase_names` per row.
    pub phase: Vec<u16>,
    pub phase_names: Vec<String>,
    pub armed: Vec<bool>,
    pub pos: Vec<[f64; 3]>,
    pub vel: Vec<[f64; 3]>,
    pub acc: Vec<[f64; 3]>,
    pub att: Vec<[f64; 3]>,
    pub att_cmd: Vec<[f64; 3]>,
    pub thrust: Vec<f64>,
    pub ref_pos: Vec<[f64; 3]>,
    pub ref_vel: Vec<[f64; 3]>,
    pub ref_acc: Vec<[f64; 3]>,
    pub compression: Vec<f64>,
    pub switch: Vec<bool>,
    pub hold_timer: Vec<f64>,
    pub contact_force: Vec<[f64; 3]>,
    pub wind_force: Vec<[f64; 3]>,
    pub slip: Vec<f64>,
    pub deployed_flag: Vec<bool>,
}

/// One log row, assembled by the runner each step.
pub(crate) struct LogRow {
    pub t: f64,
    pub phase: u16,
    pub armed: bool,
    pub state_pos: Vector3<f64>,
    pub state_vel: Vector3<f64>,
    pub accel: Vector3<f64>,
    pub att: [f64; 3],
    pub att_cmd: [f64; 3],
    pub thrust: f64,
    pub ref_pos: Vector3<f64>,
    pub ref_vel: Vector3<f64>,
    pub ref_acc: Vector3<f64>,
    pub compression: f64,
    pub switch: bool,
    pub hold_timer: f64,
    pub contact_force: Vector3<f64>,
    pub wind_force: Vector3<f64>,
    pub slip: f64,
    pub deployed: bool,
}

impl SimLog {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Registers a phase label, returning its row index.
    pub fn intern_phase(&mut self, name: &str) -> u16 {
        if let Some(i) = self.phase_names.iter().position(|n| n == name) {
            return i as u16;
        }
        self.phase_names.push(name.to_string());
        (self.phase_names.len() - 1) as u16
    }

    pub(crate) fn push(&mut self, row: LogRow) {
        self.t.push(row.t);
        self.phase.push(row.phase);
        self.armed.push(row.armed);
        self.pos.push(row.state_pos.into());
        self.vel.push(row.state_vel.into());
        self.acc.push(row.accel.into());
        self.att.push(row.att);
        self.att_cmd.push(row.att_cmd);
        self.thrust.push(row.thrust);
        self.ref_pos.push(row.ref_pos.into());
        self.ref_vel.push(row.ref_vel.into());
        self.ref_acc.push(row.ref_acc.into());
        self.compression.push(row.compression);
        self.switch.push(row.switch);
        self.hold_timer.push(row.hold_timer);
        self.contact_force.push(row.contact_force.into());
        self.wind_force.push(row.wind_force.into());
        self.slip.push(row.slip);
        self.deployed_flag.push(row.deployed);
    }

    /// Writes the run CSV: actual state, contact channels, and phase, one
    /// row every `every` steps.
    ///
    /// Columns: `t,x,y,z,vx,vy,vz,ax,ay,az,compression_m,switch,armed,fx,fy,fz,phase`.
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W, every: usize) -> std::io::Result<()> {
        writeln!(w, "t,x,y,z,vx,vy,vz,ax,ay,az,compression_m,switch,armed,fx,fy,fz,phase")?;
        let every = every.max(1);
        for i in (0..self.len()).step_by(every) {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                self.t[i],
                self.pos[i][0],
                self.pos[i][1],
                self.pos[i][2],
                self.vel[i][0],
                self.vel[i][1],
                self.vel[i][2],
                self.acc[i][0],
                self.acc[i][1],
                self.acc[i][2],
                self.compression[i],
                self.switch[i] as u8,
                self.armed[i] as u8,
                self.contact_force[i][0],
                self.contact_force[i][1],
                self.contact_force[i][2],
                self.phase_names[self.phase[i] as usize],
            )?;
        }
        Ok(())
    }

    /// Reference-versus-actual series for reports:
    /// `t,phase,rx,ry,rz,x,y,z,rvx,rvy,rvz,vx,vy,vz,roll,pitch,yaw`.
    pub fn write_tracking_csv<W: std::io::Write>(
        &self,
        w: &mut W,
        every: usize,
    ) -> std::io::Result<()> {
        writeln!(w, "t,phase,rx,ry,rz,x,y,z,rvx,rvy,rvz,vx,vy,vz,roll,pitch,yaw")?;
        let every = every.max(1);
        for i in (0..self.len()).step_by(every) {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                self.t[i],
                self.phase_names[self.phase[i] as usize],
                self.ref_pos[i][0],
                self.ref_pos[i][1],
                self.ref_pos[i][2],
                self.pos[i][0],
                self.pos[i][1],
                self.pos[i][2],
                self.ref_vel[i][0],
                self.ref_vel[i][1],
                self.ref_vel[i][2],
                self.vel[i][0],
                self.vel[i][1],
                self.vel[i][2],
                self.att[i][0],
                self.att[i][1],
                self.att[i][2],
            )?;
        }
        Ok(())
    }
}

/// Outcome of one nail approach.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NailRecord {
    pub index: usize,
    pub deployed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deploy_time: Option<f64>,
    /// Nose contact point at fire time, roof frame (up-slope coordinate).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_roof: Option<f64>,
    /// Along-eave coordinate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_roof: Option<f64>,
}
