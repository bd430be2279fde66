import { describe, expect, it } from "vitest";
import { ForceSimulation, SimLink } from "../src/force.js";

const LINKS: SimLink[] = [{ source: "a", target: "b", weight: 1 }];

function dist(sim: ForceSimulation, x: string, y: string): number {
  const a = sim.get(x)!;
  const b = sim.get(y)!;
  return Math.hypot(a.x - b.x, a.y - b.y);
}

describe("force layout", () => {
  it("is deterministic for the same input", () => {
    const one = new ForceSimulation(["a", "b", "c"], LINKS, 600, 400).run();
    const two = new ForceSimulation(["a", "b", "c"], LINKS, 600, 400).run();
    for (const node of one.nodes) {
      const twin = two.get(node.id)!;
      expect(twin.x).toBe(node.x);
      expect(twin.y).toBe(node.y);
    }
  });

  it("pulls linked nodes closer than unlinked ones", () => {
    const sim = new ForceSimulation(["a", "b", "c", "d"], LINKS, 600, 400).run();
    expect(dist(sim, "a", "b")).toBeLessThan(dist(sim, "c", "d"));

    const unlinked = new ForceSimulation(["a", "b", "c", "d"], [], 600, 400).run();
    expect(dist(sim, "a", "b")).toBeLessThan(dist(unlinked, "a", "b"));
  });

  it("pulls heavier links tighter", () => {
    const light = new ForceSimulation(
      ["a", "b", "c", "d"],
      [{ source: "a", target: "b", weight: 0.3 }],
      600,
      400,
    ).run();
    const heavy = new ForceSimulation(["a", "b", "c", "d"], LINKS, 600, 400).run();
    expect(dist(heavy, "a", "b")).toBeLessThan(dist(light, "a", "b"));
  });

  it("keeps every node inside the viewport", () => {
    const ids = Array.from({ length: 40 }, (_, i) => `n${i}`);
    const sim = new ForceSimulation(ids, [], 600, 400).run();
    for (const node of sim.nodes) {
      expect(node.x).toBeGreaterThanOrEqual(0);
      expect(node.x).toBeLessThanOrEqual(600);
      expect(node.y).toBeGreaterThanOrEqual(0);
      expect(node.y).toBeLessThanOrEqual(400);
    }
  });

  it("separates coincident nodes", () => {
    const sim = new ForceSimulation(["a"], [], 600, 400);
    sim.nodes.push({ id: "b", x: sim.nodes[0].x, y: sim.nodes[0].y, vx: 0, vy: 0 });
    sim.tick();
    expect(sim.nodes[0].x).not.toBe(sim.nodes[1].x);
  });

  it("drops links that reference unknown nodes", () => {
    const sim = new ForceSimulation(
      ["a"],
      [{ source: "a", target: "ghost", weight: 1 }],
      600,
      400,
    );
    expect(() => sim.run()).not.toThrow();
  });
});
