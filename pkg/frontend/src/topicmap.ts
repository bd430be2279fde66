import { ApiClient } from "./api.js";
import { ForceSimulation, SimLink } from "./force.js";
import { TopicMap, TopicMapNode } from "./types.js";

const WIDTH = 760;
const HEIGHT = 520;
const SVG_NS = "http://www.w3.org/2000/svg";

// distinct fills per cluster id, cycled when there are more clusters
const PALETTE = [
  "#4c78a8",
  "#f58518",
  "#54a24b",
  "#e45756",
  "#72b7b2",
  "#b279a2",
  "#eeca3b",
  "#9d755d",
];

export function clusterColor(cluster: number): string {
  return PALETTE[((cluster % PALETTE.length) + PALETTE.length) % PALETTE.length];
}

/** Node radius grows with the weakest cross-genre association score. */
export function nodeRadius(node: TopicMapNode): number {
  const npmi = Math.min(Math.max(node.min_npmi, 0), 1);
  return 7 + 13 * npmi;
}

export class TopicMapView {
  private map: TopicMap | null = null;
  private clusterFilter: number | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly root: HTMLElement,
    private readonly onTermClick: (termId: string) => void,
  ) {}

  async load(): Promise<void> {
    this.map = await this.api.topicMap();
    this.clusterFilter = null;
    this.render();
  }

  setClusterFilter(cluster: number | null): void {
    this.clusterFilter = cluster;
    this.render();
  }

  private visibleNodes(): TopicMapNode[] {
    if (!this.map) return [];
    if (this.clusterFilter === null) return this.map.nodes;
    return this.map.nodes.filter((n) => n.cluster === this.clusterFilter);
  }

  render(): void {
    this.root.textContent = "";
    if (!this.map || this.map.nodes.length === 0) {
      const empty = document.createElement("p");
      empty.className = "empty-state";
      empty.textContent = "No topic map yet. Run the network stage first.";
      this.root.appendChild(empty);
      return;
    }

    this.root.appendChild(this.filterBar());

    const nodes = this.visibleNodes();
    const visible = new Set(nodes.map((n) => n.id));
    const links: SimLink[] = this.map.edges.filter(
      (e) => visible.has(e.source) && visible.has(e.target),
    );
    const sim = new ForceSimulation(
      nodes.map((n) => n.id),
      links,
      WIDTH,
      HEIGHT,
    ).run();

    const svg = document.createElementNS(SVG_NS, "svg");
    svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
    svg.setAttribute("class", "topic-map");

    for (const link of links) {
      const a = sim.get(link.source)!;
      const b = sim.get(link.target)!;
      const line = document.createElementNS(SVG_NS, "line");
      line.setAttribute("x1", a.x.toFixed(1));
      line.setAttribute("y1", a.y.toFixed(1));
      line.setAttribute("x2", b.x.toFixed(1));
      line.setAttribute("y2", b.y.toFixed(1));
      line.setAttribute("class", "topic-edge");
      line.setAttribute("stroke-width", (1 + 2 * link.weight).toFixed(2));
      svg.appendChild(line);
    }

    for (const node of nodes) {
      const pos = sim.get(node.id)!;
      const g = document.createElementNS(SVG_NS, "g");
      g.setAttribute("class", "topic-node");
      g.setAttribute("data-term", node.id);
      g.setAttribute("data-cluster", String(node.cluster));

      const circle = document.createElementNS(SVG_NS, "circle");
      circle.setAttribute("cx", pos.x.toFixed(1));
      circle.setAttribute("cy", pos.y.toFixed(1));
      circle.setAttribute("r", nodeRadius(node).toFixed(1));
      circle.setAttribute("fill", clusterColor(node.cluster));
      if (node.newly_detected) circle.setAttribute("class", "newly-detected");

      const title = document.createElementNS(SVG_NS, "title");
      title.textContent =
        `${node.label}\ncluster ${node.cluster}` +
        `\nmin npmi ${node.min_npmi.toFixed(3)}` +
        (node.newly_detected ? "\nnewly detected" : "");
      circle.appendChild(title);

      const text = document.createElementNS(SVG_NS, "text");
      text.setAttribute("x", pos.x.toFixed(1));
      text.setAttribute("y", (pos.y - nodeRadius(node) - 4).toFixed(1));
      text.textContent = node.label;

      g.appendChild(circle);
      g.appendChild(text);
      g.addEventListener("click", () => this.onTermClick(node.id));
      svg.appendChild(g);
    }

    this.root.appendChild(svg);
  }

  private filterBar(): HTMLElement {
    const bar = document.createElement("div");
    bar.className = "cluster-filter";
    const clusters = [...new Set(this.map!.nodes.map((n) => n.cluster))].sort(
      (a, b) => a - b,
    );

    const all = document.createElement("button");
    all.textContent = "all clusters";
    all.className = this.clusterFilter === null ? "active" : "";
    all.addEventListener("click", () => this.setClusterFilter(null));
    bar.appendChild(all);

    for (const cluster of clusters) {
      const btn = document.createElement("button");
      btn.textContent = `cluster ${cluster}`;
      btn.style.borderColor = clusterColor(cluster);
      btn.className = this.clusterFilter === cluster ? "active" : "";
      btn.addEventListener("click", () => this.setClusterFilter(cluster));
      bar.appendChild(btn);
    }
    return bar;
  }
}
