import { ApiClient, ApiError } from "./api.js";
import { SelectionCart } from "./cart.js";
import { KgBrowser } from "./kg.js";
import { ReviewQueue } from "./review.js";
import { TopicMapView } from "./topicmap.js";
import { STAGES, Stage } from "./types.js";

type TabName = "map" | "documents" | "review" | "graph";

export class App {
  private readonly api = new ApiClient();
  private readonly banner: HTMLElement;
  private readonly tabs = new Map<TabName, HTMLElement>();
  private readonly panes = new Map<TabName, HTMLElement>();
  private readonly jobSelect: HTMLSelectElement;
  private readonly map: TopicMapView;
  private readonly cart: SelectionCart;
  private readonly review: ReviewQueue;
  private readonly graph: KgBrowser;
  private active: TabName = "map";

  constructor(root: HTMLElement) {
    this.banner = this.el("div", "banner hidden");
    root.appendChild(this.banner);

    const toolbar = this.el("header", "toolbar");
    this.jobSelect = document.createElement("select");
    this.jobSelect.className = "job-select";
    this.jobSelect.addEventListener("change", () => {
      this.api.setJob(this.jobSelect.value);
      void this.refresh();
    });
    toolbar.appendChild(this.jobSelect);

    const newJob = document.createElement("button");
    newJob.textContent = "new job";
    newJob.addEventListener("click", () => void this.createJob());
    toolbar.appendChild(newJob);

    for (const stage of STAGES) {
      const btn = document.createElement("button");
      btn.className = "stage-btn";
      btn.textContent = stage.replace(/_/g, " ");
      btn.addEventListener("click", () => void this.runStage(stage));
      toolbar.appendChild(btn);
    }
    root.appendChild(toolbar);

    const nav = this.el("nav", "tabs");
    const labels: [TabName, string][] = [
      ["map", "topic map"],
      ["documents", "documents"],
      ["review", "review"],
      ["graph", "knowledge graph"],
    ];
    for (const [name, label] of labels) {
      const tab = document.createElement("button");
      tab.textContent = label;
      tab.addEventListener("click", () => void this.show(name));
      nav.appendChild(tab);
      this.tabs.set(name, tab);

      const pane = this.el("section", "pane hidden");
      root.appendChild(pane);
      this.panes.set(name, pane);
    }
    root.insertBefore(nav, this.panes.get("map")!);

    const fail = (err: unknown) => this.report(err);
    this.map = new TopicMapView(this.api, this.panes.get("map")!, (term) => {
      void this.show("documents", term);
    });
    this.cart = new SelectionCart(this.api, this.panes.get("documents")!, fail);
    this.review = new ReviewQueue(this.api, this.panes.get("review")!, fail);
    this.graph = new KgBrowser(this.api, this.panes.get("graph")!);
  }

  private el(tag: string, className: string): HTMLElement {
    const node = document.createElement(tag);
    node.className = className;
    return node;
  }

  private report(err: unknown): void {
    if (err instanceof ApiError) {
      this.banner.textContent = `server said ${err.status}: ${err.message}`;
    } else {
      this.banner.textContent = "server unreachable";
    }
    this.banner.classList.remove("hidden");
  }

  private clearBanner(): void {
    this.banner.classList.add("hidden");
    this.banner.textContent = "";
  }

  async start(): Promise<void> {
    try {
      const jobs = await this.api.listJobs();
      this.jobSelect.textContent = "";
      for (const job of jobs) {
        const opt = document.createElement("option");
        opt.value = job.job_id;
        opt.textContent = `${job.job_id} (${job.stage ?? "new"})`;
        this.jobSelect.appendChild(opt);
      }
      if (jobs.length > 0) {
        const last = jobs[jobs.length - 1].job_id;
        this.jobSelect.value = last;
        this.api.setJob(last);
      }
      this.clearBanner();
    } catch (err) {
      this.report(err);
      return;
    }
    await this.show(this.active);
  }

  private async createJob(): Promise<void> {
    try {
      await this.api.createJob();
    } catch (err) {
      this.report(err);
      return;
    }
    await this.start();
  }

  private async runStage(stage: Stage): Promise<void> {
    const jobId = this.jobSelect.value;
    if (!jobId) {
      this.banner.textContent = "create a job first";
      this.banner.classList.remove("hidden");
      return;
    }
    try {
      await this.api.runStage(jobId, stage);
      this.clearBanner();
    } catch (err) {
      this.report(err);
    }
    await this.start();
  }

  async show(name: TabName, term: string | null = null): Promise<void> {
    this.active = name;
    for (const [tab, el] of this.tabs) {
      el.classList.toggle("active", tab === name);
    }
    for (const [tab, pane] of this.panes) {
      pane.classList.toggle("hidden", tab !== name);
    }
    try {
      if (name === "map") await this.map.load();
      else if (name === "documents") await this.cart.load(term);
      else if (name === "review") await this.review.load();
      else await this.graph.load();
      this.clearBanner();
    } catch (err) {
      if (err instanceof ApiError) {
        // stage not reached yet: show it as an in-pane notice, not a failure
        const pane = this.panes.get(name)!;
        pane.textContent = "";
        const note = this.el("p", "empty-state");
        note.textContent = err.message;
        pane.appendChild(note);
      } else {
        this.report(err);
      }
    }
  }

  async refresh(): Promise<void> {
    await this.show(this.active);
  }
}

export function mount(root: HTMLElement): App {
  const app = new App(root);
  void app.start();
  return app;
}

const host = document.getElementById("app");
if (host) mount(host);
