// DOM wiring: program view, angle tiles, shared clock, export download.

import { EditSession, SessionManifest, AngleSource } from "./session.js";
import { renderTraces } from "./traceRenderer.js";

const TILE_W = 320;
const TILE_H = 180;
const PROGRAM_W = 640;
const PROGRAM_H = 360;
const MAX_DRIFT_S = 0.05;

interface AngleView {
  source: AngleSource;
  tile: HTMLCanvasElement | HTMLVideoElement;
  video?: HTMLVideoElement;
}

export class Player {
  readonly session: EditSession;
  private views: AngleView[] = [];
  private program: HTMLCanvasElement;
  private clockLabel: HTMLElement;
  private lastStamp: number | null = null;

  constructor(manifest: SessionManifest, root: HTMLElement) {
    this.session = new EditSession(manifest);
    root.innerHTML = "";

    this.program = document.createElement("canvas");
    this.program.width = PROGRAM_W;
    this.program.height = PROGRAM_H;
    this.program.className = "program";
    root.appendChild(this.program);

    const strip = document.createElement("div");
    strip.className = "tiles";
    manifest.angles.forEach((source, index) => {
      const view = this.buildTile(source, index);
      this.views.push(view);
      strip.appendChild(this.wrapTile(view.tile, source.label ?? `angle ${index}`, index));
    });
    root.appendChild(strip);

    const controls = document.createElement("div");
    controls.className = "controls";
    const playButton = document.createElement("button");
    playButton.textContent = "play";
    playButton.onclick = () => {
      if (this.session.playing) {
        this.session.pause();
        playButton.textContent = "play";
      } else {
        this.session.play();
        playButton.textContent = "pause";
      }
      this.views.forEach((v) => {
        if (!v.video) return;
        if (this.session.playing) void v.video.play();
        else v.video.pause();
      });
    };
    controls.appendChild(playButton);

    const experience = document.createElement("select");
    for (const level of ["none", "some", "a_lot"]) {
      const opt = document.createElement("option");
      opt.value = level;
      opt.textContent = `experience: ${level.replace("_", " ")}`;
      experience.appendChild(opt);
    }
    experience.onchange = () => {
      this.session.experience = experience.value as EditSession["experience"];
    };
    controls.appendChild(experience);

    const exportButton = document.createElement("button");
    exportButton.textContent = "export cuts";
    exportButton.onclick = () => this.download();
    controls.appendChild(exportButton);

    this.clockLabel = document.createElement("span");
    this.clockLabel.className = "clock";
    controls.appendChild(this.clockLabel);
    root.appendChild(controls);

    requestAnimationFrame((t) => this.frame(t));
  }

  private buildTile(source: AngleSource, index: number): AngleView {
    if (source.video) {
      const video = document.createElement("video");
      video.src = source.video;
      video.muted = true;
      video.width = TILE_W;
      video.height = TILE_H;
      video.onerror = () => video.classList.add("failed");
      return { source, tile: video, video };
    }
    const canvas = document.createElement("canvas");
    canvas.width = TILE_W;
    canvas.height = TILE_H;
    return { source, tile: canvas };
  }

  private wrapTile(tile: HTMLElement, label: string, index: number): HTMLElement {
    const cell = document.createElement("figure");
    cell.className = "tile";
    cell.appendChild(tile);
    const caption = document.createElement("figcaption");
    caption.textContent = label;
    cell.appendChild(caption);
    cell.onclick = () => {
      this.session.clickAngle(index);
      this.refreshHighlight();
    };
    return cell;
  }

  private refreshHighlight(): void {
    this.views.forEach((v, i) => {
      v.tile.parentElement?.classList.toggle("live", i === this.session.currentAngle);
    });
  }

  private frame(stamp: number): void {
    if (this.lastStamp !== null && this.session.playing) {
      this.session.tick(this.session.clock + (stamp - this.lastStamp) / 1000);
    }
    this.lastStamp = stamp;

    const t = this.session.clock;
    for (const view of this.views) {
      if (view.video) {
        // tiles slave to the session clock; reseek only past the drift budget
        if (Math.abs(view.video.currentTime - t) > MAX_DRIFT_S) {
          view.video.currentTime = t;
        }
      } else if (view.source.traces && view.source.geometry) {
        const ctx = (view.tile as HTMLCanvasElement).getContext("2d");
        if (ctx) {
          renderTraces(ctx, view.source.traces, view.source.geometry, t, TILE_W, TILE_H);
        }
      }
    }
    this.renderProgram(t);
    this.clockLabel.textContent = `${t.toFixed(2)} s / angle ${this.session.currentAngle}`;
    requestAnimationFrame((next) => this.frame(next));
  }

  private renderProgram(t: number): void {
    const ctx = this.program.getContext("2d");
    if (!ctx) return;
    const view = this.views[this.session.currentAngle];
    if (view.video) {
      ctx.drawImage(view.video, 0, 0, PROGRAM_W, PROGRAM_H);
    } else if (view.source.traces && view.source.geometry) {
      renderTraces(ctx, view.source.traces, view.source.geometry, t, PROGRAM_W, PROGRAM_H);
    }
  }

  private download(): void {
    const blob = new Blob([this.session.exportText()], { type: "application/json" });
    const link = document.createElement("a");
    link.href = URL.createObjectURL(blob);
    link.download = `${this.session.manifest.session ?? "session"}-cuts.json`;
    link.click();
    URL.revokeObjectURL(link.href);
  }
}
