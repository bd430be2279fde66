import { ApiClient } from "./api.js";
import { ForceSimulation, SimLink } from "./force.js";
import { KgStats, KgView } from "./types.js";

const WIDTH = 760;
const HEIGHT = 520;
const SVG_NS = "http://www.w3.org/2000/svg";
const SUBCLASS = "subclass of";

/**
 * Validated-graph browser. Taxonomy edges (subclass of) draw as dashed
 * grey lines; property edges draw solid with their label at the midpoint.
 * Clicking a node focuses it, restricting the view to the node and its
 * direct neighbors; clicking nodes inside a focused view expands their
 * neighborhoods too. A stats panel summarizes the graph.
 */
export class KgBrowser {
  private view: KgView | null = null;
  private stats: KgStats | null = null;
  private focused = new Set<string>();

  constructor(
    private readonly api: ApiClient,
    private readonly root: HTMLElement,
  ) {}

  async load(): Promise<void> {
    this.view = await this.api.kg();
    this.stats = await this.api.kgStats();
    this.focused.clear();
    this.render();
  }

  /** Each focused node contributes its neighborhood to the view. */
  focus(nodeId: string): void {
    this.focused.add(nodeId);
    this.render();
  }

  clearFocus(): void {
    this.focused.clear();
    this.render();
  }

  visibleNodeIds(): Set<string> {
    const all = new Set(this.view!.nodes.map((n) => n.id));
    if (this.focused.size === 0) return all;
    const visible = new Set<string>();
    for (const id of this.focused) {
      visible.add(id);
      for (const edge of this.view!.edges) {
        if (edge.source === id) visible.add(edge.target);
        if (edge.target === id) visible.add(edge.source);
      }
    }
    return visible;
  }

  render(): void {
    this.root.textContent = "";
    if (!this.view || this.view.nodes.length === 0) {
      const empty = document.createElement("p");
      empty.className = "empty-state";
      empty.textContent = "The knowledge graph is empty. Run the validate stage first.";
      this.root.appendChild(empty);
      return;
    }

    const layout = document.createElement("div");
    layout.className = "kg-layout";
    layout.appendChild(this.graphPane());
    layout.appendChild(this.statsPanel());
    this.root.appendChild(layout);
  }

  private graphPane(): HTMLElement {
    const pane = document.createElement("div");
    pane.className = "kg-graph";

    if (this.focused.size > 0) {
      const back = document.createElement("button");
      back.className = "kg-unfocus";
      back.textContent = "show full graph";
      back.addEventListener("click", () => this.clearFocus());
      pane.appendChild(back);
    }

    const visible = this.visibleNodeIds();
    const nodes = this.view!.nodes.filter((n) => visible.has(n.id));
    const edges = this.view!.edges.filter(
      (e) => visible.has(e.source) && visible.has(e.target),
    );
    const links: SimLink[] = edges.map((e) => ({
      source: e.source,
      target: e.target,
      weight: 1,
    }));
    const sim = new ForceSimulation(
      nodes.map((n) => n.id),
      links,
      WIDTH,
      HEIGHT,
    ).run();

    const svg = document.createElementNS(SVG_NS, "svg");
    svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
    svg.setAttribute("class", "kg-view");

    for (const edge of edges) {
      const a = sim.get(edge.source)!;
      const b = sim.get(edge.target)!;
      const taxonomy = edge.label === SUBCLASS;

      const line = document.createElementNS(SVG_NS, "line");
      line.setAttribute("x1", a.x.toFixed(1));
      line.setAttribute("y1", a.y.toFixed(1));
      line.setAttribute("x2", b.x.toFixed(1));
      line.setAttribute("y2", b.y.toFixed(1));
      line.setAttribute("class", taxonomy ? "kg-edge-subclass" : "kg-edge-property");
      if (taxonomy) line.setAttribute("stroke-dasharray", "5 4");
      svg.appendChild(line);

      const label = document.createElementNS(SVG_NS, "text");
      label.setAttribute("x", ((a.x + b.x) / 2).toFixed(1));
      label.setAttribute("y", ((a.y + b.y) / 2 - 3).toFixed(1));
      label.setAttribute("class", taxonomy ? "kg-label-subclass" : "kg-label-property");
      label.textContent = edge.label;
      svg.appendChild(label);
    }

    for (const node of nodes) {
      const pos = sim.get(node.id)!;
      const g = document.createElementNS(SVG_NS, "g");
      g.setAttribute("class", "kg-node");
      g.setAttribute("data-node", node.id);

      const circle = document.createElementNS(SVG_NS, "circle");
      circle.setAttribute("cx", pos.x.toFixed(1));
      circle.setAttribute("cy", pos.y.toFixed(1));
      circle.setAttribute("r", this.focused.has(node.id) ? "11" : "8");
      const title = document.createElementNS(SVG_NS, "title");
      title.textContent = node.id;
      circle.appendChild(title);

      const text = document.createElementNS(SVG_NS, "text");
      text.setAttribute("x", pos.x.toFixed(1));
      text.setAttribute("y", (pos.y - 12).toFixed(1));
      text.textContent = node.label;

      g.appendChild(circle);
      g.appendChild(text);
      g.addEventListener("click", () => this.focus(node.id));
      svg.appendChild(g);
    }

    pane.appendChild(svg);
    return pane;
  }

  private statsPanel(): HTMLElement {
    const panel = document.createElement("dl");
    panel.className = "kg-stats";
    const rows: [string, number][] = this.stats
      ? [
          ["classes", this.stats.class_count],
          ["object properties", this.stats.object_property_count],
          ["axioms", this.stats.axiom_count],
        ]
      : [];
    const visible = this.visibleNodeIds();
    rows.push([
      "edges shown",
      this.view!.edges.filter(
        (e) => visible.has(e.source) && visible.has(e.target),
      ).length,
    ]);
    for (const [name, value] of rows) {
      const dt = document.createElement("dt");
      dt.textContent = name;
      const dd = document.createElement("dd");
      dd.textContent = String(value);
      panel.append(dt, dd);
    }
    return panel;
  }
}
