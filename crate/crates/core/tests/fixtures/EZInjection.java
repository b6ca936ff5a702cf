package the.bytecode.club.bytecodeviewer.plugin.preinstalled;

import the.bytecode.club.bytecodeviewer.api.BytecodeHook;
import the.bytecode.club.bytecodeviewer.api.PluginConsole;

public class EZInjection {

    public static BytecodeHook[] hookArray;
    private static String lastMessage = "";
    private static boolean debugHooks;
    private static boolean all = false;
    private static String[] debugClasses;
    private static PluginConsole gui;

    public static void hook(String info) {
        for (BytecodeHook hook : hookArray)
            hook.callHook(info);

        if (debugHooks) {
            if (lastMessage.equals(info))
                return;

            lastMessage = info;
            boolean print = all;

            if (!all && debugClasses.length >= 1) {
                for (String s : debugClasses) {
                    if (info.split("\\.")[0].equals(s.replaceAll("\\.", "/"))) {
                        print = true;
                        break;
                    }
                }
            }

            if (print)
                print("Method call: " + info);
        }
    }

    public static void print(String message) {
        if (gui != null)
            gui.appendText(message);
    }
}
