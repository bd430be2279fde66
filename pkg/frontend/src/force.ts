/**
 * Minimal force-directed layout. The server never computes positions, so
 * this runs client-side: spring forces along edges, pairwise repulsion,
 * and a centering pull, integrated with velocity decay.
 *
 * Nodes start on a circle (no randomness) so layouts are reproducible.
 */

export interface SimNode {
  id: string;
  x: number;
  y: number;
  vx: number;
  vy: number;
}

export interface SimLink {
  source: string;
  target: string;
  weight: number;
}

// rest length sits below the repulsion equilibrium so links attract
const SPRING = 0.04;
const SPRING_LENGTH = 55;
const REPULSION = 2600;
const CENTER_PULL = 0.012;
const DECAY = 0.82;

export class ForceSimulation {
  readonly nodes: SimNode[];
  private readonly links: SimLink[];
  private readonly index = new Map<string, SimNode>();

  constructor(
    ids: string[],
    links: SimLink[],
    private readonly width: number,
    private readonly height: number,
  ) {
    const radius = Math.min(width, height) / 3;
    this.nodes = ids.map((id, i) => {
      const angle = (2 * Math.PI * i) / Math.max(ids.length, 1);
      return {
        id,
        x: width / 2 + radius * Math.cos(angle),
        y: height / 2 + radius * Math.sin(angle),
        vx: 0,
        vy: 0,
      };
    });
    for (const node of this.nodes) this.index.set(node.id, node);
    this.links = links.filter(
      (l) => this.index.has(l.source) && this.index.has(l.target),
    );
  }

  get(id: string): SimNode | undefined {
    return this.index.get(id);
  }

  tick(): void {
    const n = this.nodes.length;
    for (let i = 0; i < n; i++) {
      for (let j = i + 1; j < n; j++) {
        const a = this.nodes[i];
        const b = this.nodes[j];
        let dx = b.x - a.x;
        let dy = b.y - a.y;
        let d2 = dx * dx + dy * dy;
        if (d2 < 1) {
          // coincident nodes get a deterministic nudge apart
          dx = 1;
          dy = 0;
          d2 = 1;
        }
        const push = REPULSION / d2;
        const d = Math.sqrt(d2);
        const fx = (dx / d) * push;
        const fy = (dy / d) * push;
        a.vx -= fx;
        a.vy -= fy;
        b.vx += fx;
        b.vy += fy;
      }
    }
    for (const link of this.links) {
      const a = this.index.get(link.source)!;
      const b = this.index.get(link.target)!;
      const dx = b.x - a.x;
      const dy = b.y - a.y;
      const d = Math.max(Math.sqrt(dx * dx + dy * dy), 1);
      // heavier edges pull harder toward the rest length
      const force = SPRING * link.weight * (d - SPRING_LENGTH);
      const fx = (dx / d) * force;
      const fy = (dy / d) * force;
      a.vx += fx;
      a.vy += fy;
      b.vx -= fx;
      b.vy -= fy;
    }
    for (const node of this.nodes) {
      node.vx += (this.width / 2 - node.x) * CENTER_PULL;
      node.vy += (this.height / 2 - node.y) * CENTER_PULL;
      node.vx *= DECAY;
      node.vy *= DECAY;
      node.x += node.vx;
      node.y += node.vy;
    }
  }

  /** Run enough ticks for the layout to settle, then clamp into view. */
  run(ticks = 220): this {
    for (let i = 0; i < ticks; i++) this.tick();
    const pad = 24;
    for (const node of this.nodes) {
      node.x = Math.min(Math.max(node.x, pad), this.width - pad);
      node.y = Math.min(Math.max(node.y, pad), this.height - pad);
    }
    return this;
  }
}
