import { describe, expect, it } from "vitest";

import { EditSession, parseManifest, SessionManifest } from "../src/session.js";

function manifest(angles = 3, duration = 30): SessionManifest {
  return parseManifest({
    session: "test",
    duration,
    angles: Array.from({ length: angles }, (_, i) => ({
      label: `cam ${i}`,
      video: `angle${i}.mp4`,
    })),
  });
}

describe("manifest parsing", () => {
  it("accepts three video angles", () => {
    const m = manifest(3);
    expect(m.angles).toHaveLength(3);
  });

  it("rejects fewer than two angles", () => {
    expect(() => parseManifest({ duration: 10, angles: [] })).toThrow(/2 angles/);
    expect(() =>
      parseManifest({ duration: 10, angles: [{ video: "a.mp4" }] }),
    ).toThrow(/2 angles/);
  });

  it("rejects non-positive durations", () => {
    expect(() => parseManifest({ duration: 0, angles: [] })).toThrow(/duration/);
  });

  it("accepts video-free angles with traces and geometry", () => {
    const m = parseManifest({
      duration: 10,
      angles: [
        {
          traces: [{ id: 0, stream: 0, kind: "individual", entries: [] }],
          geometry: { width: 1920, height: 1080, fps: 30 },
        },
        { video: "b.mp4" },
      ],
    });
    expect(m.angles[0].traces).toBeDefined();
  });

  it("rejects angles with neither video nor traces", () => {
    expect(() =>
      parseManifest({ duration: 10, angles: [{}, { video: "b.mp4" }] }),
    ).toThrow(/angle 0/);
  });
});

describe("edit session", () => {
  it("starts with the initial cut only", () => {
    const session = new EditSession(manifest(), 1);
    expect(session.cutLog).toEqual([{ time: 0, angle: 1 }]);
    expect(session.currentAngle).toBe(1);
  });

  it("logs scripted clicks with their clock times", () => {
    const session = new EditSession(manifest(), 0);
    session.play();
    session.tick(3.2);
    expect(session.clickAngle(2)).toBe(true);
    session.tick(7.9);
    expect(session.clickAngle(1)).toBe(true);
    expect(session.cutLog).toEqual([
      { time: 0, angle: 0 },
      { time: 3.2, angle: 2 },
      { time: 7.9, angle: 1 },
    ]);
  });

  it("ignores clicks on the current angle", () => {
    const session = new EditSession(manifest(), 0);
    session.play();
    session.tick(2);
    expect(session.clickAngle(0)).toBe(false);
    expect(session.cutLog).toHaveLength(1);
  });

  it("ignores clicks while paused", () => {
    const session = new EditSession(manifest(), 0);
    session.tick(2);
    expect(session.clickAngle(1)).toBe(false);
    session.play();
    session.tick(3);
    expect(session.clickAngle(1)).toBe(true);
    session.pause();
    session.tick(4);
    expect(session.clickAngle(2)).toBe(false);
  });

  it("ignores clicks inside the millisecond of the previous cut", () => {
    const session = new EditSession(manifest(), 0);
    session.play();
    expect(session.clickAngle(1, 1.0004)).toBe(true); // rounds to 1.000
    expect(session.clickAngle(2, 1.0001)).toBe(false); // also rounds to 1.000
    expect(session.clickAngle(2, 1.002)).toBe(true);
    const times = session.cutLog.map((c) => c.time);
    expect(times).toEqual([0, 1, 1.002]);
  });

  it("rejects out-of-range angles", () => {
    const session = new EditSession(manifest(3), 0);
    session.play();
    expect(() => session.clickAngle(3)).toThrow(RangeError);
    expect(() => new EditSession(manifest(3), 9)).toThrow(RangeError);
  });

  it("clock never runs backwards and clamps to the duration", () => {
    const session = new EditSession(manifest(3, 10), 0);
    session.tick(5);
    session.tick(3);
    expect(session.clock).toBe(5);
    session.tick(40);
    expect(session.clock).toBe(10);
  });

  it("drops clicks at or past the end of the video", () => {
    const session = new EditSession(manifest(3, 10), 0);
    session.play();
    expect(session.clickAngle(1, 10)).toBe(false);
    expect(session.clickAngle(1, 9.999)).toBe(true);
  });

  it("fresh session exports a single initial cut", () => {
    const session = new EditSession(manifest(), 2);
    const doc = session.exportDocument();
    expect(doc.cuts).toEqual([{ time: 0, angle: 2 }]);
    expect(doc.duration).toBe(30);
    expect(doc.experience).toBe("none");
  });

  it("export is deterministic without new clicks", () => {
    const session = new EditSession(manifest(), 0);
    session.play();
    session.clickAngle(1, 4.5);
    expect(session.exportText()).toBe(session.exportText());
  });

  it("export rounds times to milliseconds", () => {
    const session = new EditSession(manifest(), 0);
    session.play();
    session.clickAngle(1, 3.14159265);
    const doc = session.exportDocument();
    expect(doc.cuts[1].time).toBe(3.142);
  });
});
