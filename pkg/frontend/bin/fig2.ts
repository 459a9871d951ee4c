#!/usr/bin/env node
import { runFigureScript } from "../src/render";

process.exit(runFigureScript(2, process.argv.slice(2)));
