import { ApiClient } from "./api.js";
import { DocumentRow, SelectionEntry } from "./types.js";

/**
 * Corpus browser plus selection cart. Documents are listed by descending
 * relevance; rows already in the selection render checked. Toggling a row
 * posts the change and re-reads the selection from the server, so the
 * cart always shows what the backend will actually extract from.
 */
export class SelectionCart {
  private docs: DocumentRow[] = [];
  private selection: SelectionEntry[] = [];
  private termFilter: string | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly root: HTMLElement,
    private readonly onError: (err: unknown) => void,
  ) {}

  async load(term: string | null = null): Promise<void> {
    this.termFilter = term;
    this.docs = await this.api.documents(term ? { term } : {});
    this.docs.sort((a, b) => (b.relevance ?? 0) - (a.relevance ?? 0));
    this.selection = await this.api.selection();
    this.render();
  }

  selectedIds(): Set<string> {
    return new Set(this.selection.map((e) => e.doc_id));
  }

  private async toggle(docId: string, add: boolean): Promise<void> {
    try {
      await this.api.amendSelection(add ? "add" : "remove", docId);
    } catch (err) {
      this.onError(err);
    }
    // server state is the only truth; re-read rather than patching locally
    this.selection = await this.api.selection();
    this.render();
  }

  render(): void {
    this.root.textContent = "";

    const heading = document.createElement("h3");
    heading.textContent = this.termFilter
      ? `documents matching ${this.termFilter}`
      : "documents";
    this.root.appendChild(heading);

    const summary = document.createElement("p");
    summary.className = "cart-summary";
    summary.textContent = `${this.selection.length} selected for extraction`;
    this.root.appendChild(summary);

    if (this.docs.length === 0) {
      const empty = document.createElement("p");
      empty.className = "empty-state";
      empty.textContent = "No documents retrieved yet.";
      this.root.appendChild(empty);
      return;
    }

    const selected = this.selectedIds();
    const provenance = new Map(
      this.selection.map((e) => [e.doc_id, e.provenance]),
    );

    const table = document.createElement("table");
    table.className = "doc-table";
    const head = table.createTHead().insertRow();
    for (const col of ["", "id", "genre", "title", "date", "relevance"]) {
      const th = document.createElement("th");
      th.textContent = col;
      head.appendChild(th);
    }

    const body = table.createTBody();
    for (const doc of this.docs) {
      const row = body.insertRow();
      row.dataset.docId = doc.id;

      const box = document.createElement("input");
      box.type = "checkbox";
      box.checked = selected.has(doc.id);
      box.addEventListener("change", () => {
        void this.toggle(doc.id, box.checked);
      });
      row.insertCell().appendChild(box);

      const idCell = row.insertCell();
      idCell.textContent = doc.id;
      const origin = provenance.get(doc.id);
      if (origin) {
        const badge = document.createElement("span");
        badge.className = `badge badge-${origin}`;
        badge.textContent = origin === "auto_topk" ? "auto" : "added";
        idCell.appendChild(badge);
      }

      row.insertCell().textContent = doc.genre;
      const titleCell = row.insertCell();
      titleCell.textContent = doc.title;
      titleCell.title = doc.matched_terms.join(", ");
      row.insertCell().textContent = doc.date;
      row.insertCell().textContent =
        doc.relevance === undefined ? "" : doc.relevance.toFixed(4);
    }
    this.root.appendChild(table);
  }
}
