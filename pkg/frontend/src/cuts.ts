// Cut array document: the exchange format shared with the evaluation CLI.

export interface Cut {
  time: number; // seconds from the start of the video
  angle: number;
}

export type Experience = "none" | "some" | "a_lot";

export const EXPERIENCE_LEVELS: Experience[] = ["none", "some", "a_lot"];

export interface CutArrayDocument {
  duration: number;
  cuts: Cut[];
  experience?: Experience;
  session?: string;
}

export function roundToMs(t: number): number {
  return Math.round(t * 1000) / 1000;
}

/** Throws when the document violates a cut array invariant. */
export function validateCutArray(doc: CutArrayDocument): void {
  if (!(Number.isFinite(doc.duration) && doc.duration > 0)) {
    throw new Error(`duration must be positive, got ${doc.duration}`);
  }
  if (doc.cuts.length === 0) {
    throw new Error("cut array needs at least the initial cut");
  }
  if (doc.cuts[0].time !== 0) {
    throw new Error("first cut must sit at time 0");
  }
  for (let i = 0; i < doc.cuts.length; i++) {
    const cut = doc.cuts[i];
    if (!Number.isFinite(cut.time) || cut.time < 0) {
      throw new Error(`cut ${i}: bad time ${cut.time}`);
    }
    if (!Number.isInteger(cut.angle) || cut.angle < 0) {
      throw new Error(`cut ${i}: bad angle ${cut.angle}`);
    }
    if (i > 0) {
      if (cut.time <= doc.cuts[i - 1].time) {
        throw new Error(`cut ${i}: times must strictly increase`);
      }
      if (cut.angle === doc.cuts[i - 1].angle) {
        throw new Error(`cut ${i}: consecutive cuts must switch angles`);
      }
    }
  }
  const last = doc.cuts[doc.cuts.length - 1];
  if (last.time >= doc.duration) {
    throw new Error("every cut must happen before the video ends");
  }
  if (doc.experience !== undefined && !EXPERIENCE_LEVELS.includes(doc.experience)) {
    throw new Error(`experience must be one of ${EXPERIENCE_LEVELS.join(", ")}`);
  }
}

/** Stable serialization: fixed key order so identical sessions export identical bytes. */
export function formatCutArray(doc: CutArrayDocument): string {
  validateCutArray(doc);
  const body: Record<string, unknown> = {
    duration: doc.duration,
    cuts: doc.cuts.map((c) => ({ time: c.time, angle: c.angle })),
  };
  if (doc.experience !== undefined) body.experience = doc.experience;
  if (doc.session !== undefined) body.session = doc.session;
  return JSON.stringify(body, null, 2) + "\n";
}
