// Edit session state: the synced clock, the growing cut log, and the export.

import {
  Cut,
  CutArrayDocument,
  Experience,
  EXPERIENCE_LEVELS,
  formatCutArray,
  roundToMs,
} from "./cuts.js";

export interface StreamGeometry {
  width: number;
  height: number;
  fps: number;
}

/** Trace playback data, mirroring the tracker's trace file entries. */
export interface TraceData {
  id: number;
  stream: number;
  kind: string;
  entries: [number, number, number, number, number, boolean][];
}

export interface AngleSource {
  label?: string;
  /** Video file URL; omit for the video-free canvas mode. */
  video?: string;
  /** Canvas playback data when no footage is available. */
  traces?: TraceData[];
  geometry?: StreamGeometry;
}

export interface SessionManifest {
  session?: string;
  duration: number;
  angles: AngleSource[];
}

export function parseManifest(data: unknown): SessionManifest {
  if (typeof data !== "object" || data === null) {
    throw new Error("manifest must be an object");
  }
  const doc = data as Record<string, unknown>;
  const duration = doc.duration;
  if (typeof duration !== "number" || !(duration > 0)) {
    throw new Error(`manifest duration must be positive, got ${duration}`);
  }
  if (!Array.isArray(doc.angles) || doc.angles.length < 2) {
    throw new Error("manifest needs at least 2 angles");
  }
  const angles: AngleSource[] = doc.angles.map((raw, i) => {
    const angle = raw as AngleSource;
    const hasVideo = typeof angle.video === "string";
    const hasTraces = Array.isArray(angle.traces) && angle.geometry !== undefined;
    if (!hasVideo && !hasTraces) {
      throw new Error(`angle ${i}: needs a video URL or traces plus geometry`);
    }
    return angle;
  });
  return {
    session: typeof doc.session === "string" ? doc.session : undefined,
    duration,
    angles,
  };
}

/**
 * One editing run. The clock is driven from the program view; clicking a
 * tile switches the program and logs a cut. Clicks on the already-shown
 * angle, clicks while paused, and clicks landing inside the millisecond of
 * the previous cut are ignored. There is no undo.
 */
export class EditSession {
  readonly manifest: SessionManifest;
  experience: Experience;
  clock = 0;
  playing = false;
  private cuts: Cut[];

  constructor(
    manifest: SessionManifest,
    initialAngle = 0,
    experience: Experience = "none",
  ) {
    if (initialAngle < 0 || initialAngle >= manifest.angles.length) {
      throw new RangeError(`initial angle ${initialAngle} out of range`);
    }
    if (!EXPERIENCE_LEVELS.includes(experience)) {
      throw new Error(`experience must be one of ${EXPERIENCE_LEVELS.join(", ")}`);
    }
    this.manifest = manifest;
    this.experience = experience;
    this.cuts = [{ time: 0, angle: initialAngle }];
  }

  get currentAngle(): number {
    return this.cuts[this.cuts.length - 1].angle;
  }

  get cutLog(): readonly Cut[] {
    return this.cuts;
  }

  play(): void {
    this.playing = true;
  }

  pause(): void {
    this.playing = false;
  }

  /** Advance the shared clock (seconds); never moves backwards. */
  tick(clock: number): void {
    if (Number.isFinite(clock) && clock > this.clock) {
      this.clock = Math.min(clock, this.manifest.duration);
    }
  }

  /** Handle a tile click; returns true when a cut was logged. */
  clickAngle(angle: number, clock?: number): boolean {
    if (angle < 0 || angle >= this.manifest.angles.length) {
      throw new RangeError(`angle ${angle} out of range`);
    }
    if (!this.playing) return false;
    if (angle === this.currentAngle) return false;
    const t = roundToMs(clock ?? this.clock);
    const last = this.cuts[this.cuts.length - 1];
    if (t <= last.time || t >= this.manifest.duration) return false;
    this.cuts.push({ time: t, angle });
    return true;
  }

  exportDocument(): CutArrayDocument {
    return {
      duration: this.manifest.duration,
      cuts: this.cuts.map((c) => ({ time: roundToMs(c.time), angle: c.angle })),
      experience: this.experience,
      session: this.manifest.session,
    };
  }

  /** Serialized cut array, in the format the evaluate command consumes. */
  exportText(): string {
    return formatCutArray(this.exportDocument());
  }
}
