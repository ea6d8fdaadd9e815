"""Command line entry point for the sidecar server."""

from __future__ import annotations

import click


@click.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8100, show_default=True)
@click.option("--dim", default=512, show_default=True)
@click.option("--stub", is_flag=True, help="Serve deterministic hash-based vectors; no weights needed.")
@click.option("--model", "model_name", default="ViT-B-32", show_default=True)
@click.option("--pretrained", default="openai", show_default=True)
@click.option("--device", default="cpu", show_default=True)
@click.option(
    "--classifier",
    "classifiers",
    multiple=True,
    help="Classifier head weights, kind=path.npy; repeatable.",
)
def main(host, port, dim, stub, model_name, pretrained, device, classifiers):
    """Serve the embedding wire protocol."""
    import uvicorn

    from chartseek_sidecar.backend import ClipBackend, StubBackend
    from chartseek_sidecar.server import create_app

    if stub:
        backend = StubBackend(dim=dim)
    else:
        paths = {}
        for spec in classifiers:
            if "=" not in spec:
                raise click.ClickException(f"--classifier expects kind=path, got {spec!r}")
            kind, path = spec.split("=", 1)
            paths[kind] = path
        backend = ClipBackend(
            dim=dim,
            model_name=model_name,
            pretrained=pretrained,
            device=device,
            classifier_paths=paths,
        )
    uvicorn.run(create_app(backend), host=host, port=port)


if __name__ == "__main__":
    main()
