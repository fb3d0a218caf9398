import { SessionController, SessionSnapshot } from './controller'
import type { ProblemDoc } from './types'
import { comparisonRows, configurationRows, isSortedByAbsWeight, modelRows } from './view'

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: Array<Node | string>
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag)
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v)
  node.append(...children)
  return node
}

export class App {
  constructor(
    private root: HTMLElement,
    private controller: SessionController,
    private problems: Record<string, ProblemDoc>,
  ) {}

  render(s: SessionSnapshot): void {
    this.root.replaceChildren()
    if (s.notice) this.root.append(el('div', { class: 'notice', role: 'alert' }, s.notice))
    switch (s.phase) {
      case 'configuring':
      case 'error':
        this.renderCreate(s)
        break
      case 'ranking':
        this.renderRanking(s)
        break
      case 'comparing':
        this.renderComparison(s)
        break
      case 'accepted':
        this.renderAccepted(s)
        break
    }
  }

  private problem(): ProblemDoc {
    return this.controller.problem!
  }

  private renderCreate(s: SessionSnapshot): void {
    const select = el('select', { id: 'builtin', 'aria-label': 'built-in problem' })
    for (const name of Object.keys(this.problems)) {
      select.append(el('option', { value: name }, name))
    }
    const file = el('input', { type: 'file', id: 'upload', accept: '.json' })
    const start = el('button', { id: 'start' }, 'Start session')
    start.disabled = s.busy
    start.addEventListener('click', async () => {
      const picked = (file as HTMLInputElement).files?.[0]
      if (picked) {
        const doc = JSON.parse(await picked.text()) as ProblemDoc
        void this.controller.create(doc)
      } else {
        void this.controller.create(this.problems[(select as HTMLSelectElement).value])
      }
    })
    this.root.append(
      el('h1', {}, 'Preference elicitation'),
      el('p', {}, 'Pick a built-in problem or upload a problem file, then rank and compare.'),
      el('div', {}, select, file, start),
    )
  }

  private renderRanking(s: SessionSnapshot): void {
    this.root.append(el('h2', {}, 'Rank these three configurations (best first)'))
    const list = el('ol', { id: 'triple' })
    s.triple.forEach((config, i) => {
      const item = el('li', { draggable: 'true', 'data-index': String(i) })
      const table = el('table', { class: 'config' })
      for (const row of configurationRows(this.problem(), config)) {
        table.append(el('tr', {}, el('td', {}, row.attribute), el('td', {}, row.value)))
      }
      const up = el('button', { 'aria-label': `move option ${i + 1} up` }, '↑')
      const down = el('button', { 'aria-label': `move option ${i + 1} down` }, '↓')
      up.addEventListener('click', () => this.controller.reorderTriple(i, Math.max(0, i - 1)))
      down.addEventListener('click', () =>
        this.controller.reorderTriple(i, Math.min(s.triple.length - 1, i + 1)),
      )
      item.addEventListener('dragstart', (ev) =>
        (ev as DragEvent).dataTransfer?.setData('text/plain', String(i)),
      )
      item.addEventListener('dragover', (ev) => ev.preventDefault())
      item.addEventListener('drop', (ev) => {
        ev.preventDefault()
        const from = Number((ev as DragEvent).dataTransfer?.getData('text/plain'))
        this.controller.reorderTriple(from, i)
      })
      item.append(table, up, down)
      list.append(item)
    })
    const submit = el('button', { id: 'submit-ranking' }, 'Submit ranking')
    submit.disabled = s.busy
    submit.addEventListener('click', () => void this.controller.submitRanking())
    this.root.append(list, submit)
  }

  private renderComparison(s: SessionSnapshot): void {
    this.root.append(el('h2', {}, `Which do you prefer? (answered: ${s.answered})`))
    const table = el('table', { id: 'pair' })
    table.append(
      el('tr', {}, el('th', {}, 'attribute'), el('th', {}, 'option A'), el('th', {}, 'option B')),
    )
    for (const row of comparisonRows(this.problem(), s.query!.first, s.query!.second)) {
      const tr = el(
        'tr',
        row.differs ? { class: 'differs' } : {},
        el('td', {}, row.attribute),
        el('td', {}, row.left),
        el('td', {}, row.right),
      )
      table.append(tr)
    }
    const first = el('button', { id: 'prefer-first' }, 'Prefer A')
    const second = el('button', { id: 'prefer-second' }, 'Prefer B')
    const accept = el('button', { id: 'accept' }, 'Accept current recommendation')
    first.disabled = second.disabled = accept.disabled = s.busy
    first.addEventListener('click', () => void this.controller.answer('first'))
    second.addEventListener('click', () => void this.controller.answer('second'))
    accept.addEventListener('click', () => void this.controller.accept())
    this.root.append(table, el('div', {}, first, second, accept))

    if (s.recommendation) {
      this.root.append(el('h3', {}, 'Current recommendation'))
      const rec = el('table', { id: 'recommendation' })
      for (const row of configurationRows(this.problem(), s.recommendation)) {
        rec.append(el('tr', {}, el('td', {}, row.attribute), el('td', {}, row.value)))
      }
      this.root.append(rec)
    }
    if (s.model.length) {
      this.root.append(el('h3', {}, 'Learned features (strongest first)'))
      const rows = modelRows(s.model, this.problem())
      if (!isSortedByAbsWeight(rows)) rows.sort((a, b) => Math.abs(b.weight) - Math.abs(a.weight))
      const inspector = el('table', { id: 'model' })
      for (const row of rows) {
        inspector.append(
          el('tr', {}, el('td', {}, row.label), el('td', {}, row.weight.toFixed(4))),
        )
      }
      this.root.append(inspector)
    }
  }

  private renderAccepted(s: SessionSnapshot): void {
    this.root.append(el('h2', {}, 'Accepted configuration'))
    const table = el('table', { id: 'final' })
    for (const row of configurationRows(this.problem(), s.final!)) {
      table.append(el('tr', {}, el('td', {}, row.attribute), el('td', {}, row.value)))
    }
    this.root.append(table)
  }
}
