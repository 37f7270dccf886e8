import sys
from pathlib import Path

# Add lib directory to path for external modules
plugindir = Path.absolute(Path(__file__).parent)
paths = (".", "lib", "plugin")
sys.path = [str(plugindir / p) for p in paths] + sys.path

from pyflowlauncher import Plugin, Result, api, send_results
from pyflowlauncher.result import JsonRPCAction, ResultResponse
from pyflowlauncher.settings import settings

from fogduty.launcher import (ICON, LauncherSettings, error_rows, error_types, export_table,
                              handle_query)
from fogduty.settings import load_config

# Cache for settings to handle inconsistent settings() behavior
_settings_cache = {}


def get_settings() -> LauncherSettings:
    """
    Launcher settings; the FOGDUTY_CONFIG environment variable takes priority
    over the config path entered in the settings form.
    """
    current_settings = settings()
    if current_settings is not None:
        _settings_cache.update(current_settings)
    return LauncherSettings.from_mapping(_settings_cache)


# Run at module load to initialize settings
try:
    settings_obj = settings()
    if settings_obj is not None:
        _settings_cache.update(settings_obj)
except Exception:
    pass


plugin = Plugin()


def _handle_error(exc: Exception) -> ResultResponse:
    return send_results(error_rows(exc))


for error_type in error_types():
    plugin.add_exception_handler(error_type, _handle_error)


@plugin.on_method
def query(query: str) -> ResultResponse:
    """Main entry point for the plugin."""
    current = get_settings()
    config = load_config(current.config_path)
    return send_results(handle_query(query, config, current))


@plugin.on_method
def copy_to_clipboard(text: str) -> ResultResponse:
    """Copy text to clipboard."""
    try:
        import pyperclip
        pyperclip.copy(text)

        return send_results([
            Result(
                Title="Copied to clipboard",
                SubTitle=text[:100] + "..." if len(text) > 100 else text,
                IcoPath=ICON
            )
        ])
    except ImportError:
        return send_results([
            Result(
                Title="Error: Could not copy to clipboard",
                SubTitle="The pyperclip module is not installed properly",
                IcoPath=ICON
            )
        ])


@plugin.on_method
def export(name: str) -> JsonRPCAction:
    """Write a table as CSV and open its folder."""
    path = export_table(name, load_config(get_settings().config_path))
    return api.open_directory(str(path.parent), str(path))


@plugin.on_method
def context_menu(data: list) -> ResultResponse:
    """Context menu for showing additional actions on results."""
    text, table = (list(data) + ["", ""])[:2]
    results = [
        Result(
            Title="Copy to clipboard",
            SubTitle=text,
            IcoPath=ICON,
            JsonRPCAction={
                "method": "copy_to_clipboard",
                "parameters": [text]
            }
        )
    ]
    if table:
        results.append(
            Result(
                Title=f"Export {table}",
                SubTitle="Write the full table as CSV and open its folder",
                IcoPath=ICON,
                JsonRPCAction={
                    "method": "export",
                    "parameters": [table]
                }
            )
        )
    return send_results(results)


if __name__ == "__main__":
    plugin.run()
