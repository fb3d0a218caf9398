import { ApiClient } from './api'
import { App } from './app'
import { SessionController } from './controller'
import type { ProblemDoc } from './types'
import housing from '../fixtures/housing.json'
import scheduling from '../fixtures/scheduling.json'

const params = new URLSearchParams(window.location.search)
const baseUrl = params.get('server') ?? 'http://127.0.0.1:8080'

const root = document.getElementById('app')!
const api = new ApiClient(baseUrl)
const controller = new SessionController(api, (snapshot) => app.render(snapshot))
const app = new App(root, controller, {
  housing: housing as ProblemDoc,
  scheduling: scheduling as ProblemDoc,
})
app.render(controller.snapshot())
