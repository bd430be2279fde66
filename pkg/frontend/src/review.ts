import { ApiClient } from "./api.js";
import { ReviewTriple } from "./types.js";

const PAGE_SIZE = 5;

/**
 * Human review of extracted triples. Shows one page of pending items at a
 * time with the source snippet; accept and reject post the verdict and
 * re-pull the queue. When nothing is pending the view flips to a done
 * state inviting the validate stage.
 */
export class ReviewQueue {
  private queue: ReviewTriple[] = [];
  private page = 0;

  constructor(
    private readonly api: ApiClient,
    private readonly root: HTMLElement,
    private readonly onError: (err: unknown) => void,
  ) {}

  async load(): Promise<void> {
    this.queue = await this.api.reviewQueue();
    const lastPage = Math.max(Math.ceil(this.queue.length / PAGE_SIZE) - 1, 0);
    if (this.page > lastPage) this.page = lastPage;
    this.render();
  }

  private async decide(triple: ReviewTriple, accept: boolean): Promise<void> {
    try {
      if (accept) {
        await this.api.reviewAccept(triple.triple_id);
      } else {
        const reason = window.prompt("why reject?", "") ?? "";
        await this.api.reviewReject(triple.triple_id, reason);
      }
    } catch (err) {
      this.onError(err);
    }
    await this.load();
  }

  render(): void {
    this.root.textContent = "";

    if (this.queue.length === 0) {
      const done = document.createElement("div");
      done.className = "review-done";
      done.textContent =
        "Review complete: no pending triples. Run the validate stage to fold accepted triples into the graph.";
      this.root.appendChild(done);
      return;
    }

    const counter = document.createElement("p");
    counter.className = "review-counter";
    counter.textContent = `${this.queue.length} pending`;
    this.root.appendChild(counter);

    const start = this.page * PAGE_SIZE;
    for (const triple of this.queue.slice(start, start + PAGE_SIZE)) {
      this.root.appendChild(this.card(triple));
    }

    this.root.appendChild(this.pager());
  }

  private card(triple: ReviewTriple): HTMLElement {
    const card = document.createElement("div");
    card.className = "review-card";
    card.dataset.tripleId = triple.triple_id;

    const statement = document.createElement("div");
    statement.className = "review-statement";

    const head = document.createElement("strong");
    head.textContent = triple.head;
    const headBadge = document.createElement("span");
    headBadge.className = "badge badge-class";
    headBadge.textContent = triple.head_class;

    const relation = document.createElement("em");
    relation.textContent = ` ${triple.relation} `;

    const tail = document.createElement("strong");
    tail.textContent = triple.tail;
    const tailBadge = document.createElement("span");
    tailBadge.className = "badge badge-class";
    tailBadge.textContent = triple.tail_class;

    statement.append(head, headBadge, relation, tail, tailBadge);
    card.appendChild(statement);

    const snippet = document.createElement("blockquote");
    snippet.className = "review-snippet";
    snippet.textContent = triple.snippet;
    snippet.title = `${triple.doc_id} chunk ${triple.chunk}`;
    card.appendChild(snippet);

    const actions = document.createElement("div");
    actions.className = "review-actions";
    const accept = document.createElement("button");
    accept.textContent = "accept";
    accept.className = "accept";
    accept.addEventListener("click", () => void this.decide(triple, true));
    const reject = document.createElement("button");
    reject.textContent = "reject";
    reject.className = "reject";
    reject.addEventListener("click", () => void this.decide(triple, false));
    actions.append(accept, reject);
    card.appendChild(actions);

    return card;
  }

  private pager(): HTMLElement {
    const pages = Math.ceil(this.queue.length / PAGE_SIZE);
    const pager = document.createElement("div");
    pager.className = "pager";

    const prev = document.createElement("button");
    prev.textContent = "prev";
    prev.disabled = this.page === 0;
    prev.addEventListener("click", () => {
      this.page -= 1;
      this.render();
    });

    const label = document.createElement("span");
    label.textContent = `page ${this.page + 1} / ${pages}`;

    const next = document.createElement("button");
    next.textContent = "next";
    next.disabled = this.page >= pages - 1;
    next.addEventListener("click", () => {
      this.page += 1;
      this.render();
    });

    pager.append(prev, label, next);
    return pager;
  }
}
