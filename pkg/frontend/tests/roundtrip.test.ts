// The exported file must feed straight into the primary pipeline's
// `evaluate` command: a scripted 5-cut session is exported, parsed by the
// Python CLI with zero errors, and reproduces the scripted times to 1 ms.

import { execFileSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";
import { afterAll, describe, expect, it } from "vitest";

import { EditSession, parseManifest } from "../src/session.js";

const PYTHON_SRC = resolve(__dirname, "..", "..", "src");
const workDir = mkdtempSync(join(tmpdir(), "edit-capture-"));

afterAll(() => rmSync(workDir, { recursive: true, force: true }));

function scriptedSession(): EditSession {
  const manifest = parseManifest({
    session: "scripted",
    duration: 60,
    angles: [
      { video: "a.mp4" },
      { video: "b.mp4" },
      { video: "c.mp4" },
    ],
  });
  const session = new EditSession(manifest, 0, "some");
  session.play();
  const clicks: [number, number][] = [
    [3.2041, 1],
    [9.5, 2],
    [17.8333, 0],
    [26.25, 2],
    [41.0087, 1],
  ];
  for (const [time, angle] of clicks) {
    session.tick(time);
    expect(session.clickAngle(angle)).toBe(true);
  }
  return session;
}

function runEvaluate(a: string, b: string): string {
  return execFileSync("python3", ["-m", "autodirector", "evaluate", a, b], {
    env: { ...process.env, PYTHONPATH: PYTHON_SRC },
    encoding: "utf-8",
  });
}

describe("export round trip through the evaluate command", () => {
  it("five scripted cuts survive at millisecond precision", () => {
    const session = scriptedSession();
    const path = join(workDir, "scripted.json");
    writeFileSync(path, session.exportText());

    const report = runEvaluate(path, path);
    expect(report).toContain("rmse (s)");
    expect(report).toContain("0.000000");
    expect(report).toContain("1.0000");

    const parsed = JSON.parse(readFileSync(path, "utf-8"));
    const expected = [0, 3.204, 9.5, 17.833, 26.25, 41.009];
    expect(parsed.cuts).toHaveLength(6);
    parsed.cuts.forEach((cut: { time: number }, i: number) => {
      expect(Math.abs(cut.time - expected[i])).toBeLessThanOrEqual(0.001);
    });
    expect(parsed.experience).toBe("some");
  });

  it("exporting twice without new clicks is byte-identical", () => {
    const session = scriptedSession();
    expect(session.exportText()).toBe(session.exportText());
  });

  it("export against a different edit reports finite metrics", () => {
    const a = scriptedSession();
    const manifest = parseManifest({
      duration: 60,
      angles: [{ video: "a.mp4" }, { video: "b.mp4" }, { video: "c.mp4" }],
    });
    const b = new EditSession(manifest, 0, "none");
    b.play();
    b.tick(5);
    b.clickAngle(2);
    const pathA = join(workDir, "a.json");
    const pathB = join(workDir, "b.json");
    writeFileSync(pathA, a.exportText());
    writeFileSync(pathB, b.exportText());
    const report = runEvaluate(pathA, pathB);
    expect(report).toContain("overlap all angles");
  });
});
